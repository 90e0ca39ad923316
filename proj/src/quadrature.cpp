#include "gpem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace gpem {

const GaussRule& gauss_rule(int n) {
    if (n < 2 || n % 2 != 0) throw InvalidArgument("quadrature order must be even and >= 2");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (slot) return *slot;
    auto r = std::make_unique<GaussRule>();
    r->x.resize(n);
    r->w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        r->x[i] = -z;
        r->x[n - 1 - i] = z;
        r->w[i] = r->w[n - 1 - i] = w;
    }
    slot = std::move(r);
    return *slot;
}

namespace {

double branch_sign(int n) {
    switch (((n % 4) + 4) % 4) {
        case 1: return 1.0;
        case 3: return -1.0;
        default: return 0.0;
    }
}

// ∫_{I.lo}^{min(x, I.hi)} nu'(s) g(s) ds for one support interval, with the
// edge singularities absorbed by the substitution.
template <class G>
double interval_integral(const DensityForm& f, const Interval& I, double x, G&& g,
                         const QuadSpec& q) {
    const double X = std::min(x, I.hi);
    if (!(X > I.lo)) return 0.0;
    const double sigma = branch_sign(f.sign_on(0.5 * (I.lo + I.hi)));
    auto smooth = [&](double s) {
        double r = f.B(s) / (s + f.v);
        for (double ai : f.a)
            if (ai != I.lo && ai != I.hi) r *= std::sqrt(std::abs(s - ai));
        return r;
    };
    if (I.lo == 0.0 && f.hard_origin) {
        // s = hi sin^2(th): sqrt((hi - s)/s) ds = 2 hi cos^2(th) dth
        const double thx = std::asin(std::sqrt(std::clamp(X / I.hi, 0.0, 1.0)));
        return sigma / M_PI * integrate(
                                  [&](double th) {
                                      const double sn = std::sin(th), cs = std::cos(th);
                                      const double s = I.hi * sn * sn;
                                      return smooth(s) * g(s) * 2.0 * I.hi * cs * cs;
                                  },
                                  0.0, thx, q);
    }
    // s = m + h cos(th): sqrt((s - lo)(hi - s)) ds = h^2 sin^2(th) dth
    const double m = 0.5 * (I.lo + I.hi), h = 0.5 * (I.hi - I.lo);
    const double thx = std::acos(std::clamp((X - m) / h, -1.0, 1.0));
    return sigma / M_PI * integrate(
                              [&](double th) {
                                  const double sn = std::sin(th);
                                  const double s = chord_point(I.lo, I.hi, th);
                                  double r = smooth(s) * g(s) * h * h * sn * sn;
                                  if (f.hard_origin) r /= std::sqrt(s);
                                  return r;
                              },
                              thx, M_PI, q);
}

void require_gap(double a1, double a2, double a3) {
    if (!(0.0 < a1 && a1 < a2 && a2 < a3))
        throw InvalidArgument("gap integrals need 0 < a1 < a2 < a3");
}

}  // namespace

double mass_integral(const SupportConfig& cfg, const FieldParams& p, const QuadSpec& q) {
    return partial_mass(cfg, p, std::numeric_limits<double>::infinity(), q);
}

double partial_mass(const SupportConfig& cfg, const FieldParams& p, double x,
                    const QuadSpec& q) {
    const DensityForm f = density_form(cfg, p.v);
    double m = 0.0;
    for (const auto& I : support(cfg))
        if (I.hi > I.lo) m += interval_integral(f, I, x, [](double) { return 1.0; }, q);
    return m;
}

std::array<double, 2> gap_moments(double a1, double a2, double a3, double v, const QuadSpec& q) {
    require_gap(a1, a2, a3);
    const double h = 0.5 * (a2 - a1);
    return integrate_vec<2>(
        [&](double th) {
            const double sn = std::sin(th);
            const double x = chord_point(a1, a2, th);
            const double w = std::sqrt((a3 - x) / x) / (x + v) * h * h * sn * sn;
            return std::array<double, 2>{x * w, w};
        },
        0.0, M_PI, q);
}

double gap_condition(const TwoCut& c, const FieldParams& p, const QuadSpec& q) {
    const auto mo = gap_moments(c.a1, c.a2, c.a3, p.v, q);
    return mo[0] - c.b1 * mo[1];
}

double b1_from_gap(double a1, double a2, double a3, double v, const QuadSpec& q) {
    const auto mo = gap_moments(a1, a2, a3, v, q);
    return mo[0] / mo[1];
}

double xi_robin(double a1, double a2, double a3, const QuadSpec& q) {
    require_gap(a1, a2, a3);
    // dx / sqrt((x - a1)(a2 - x)) = dth
    const auto mo = integrate_vec<2>(
        [&](double th) {
            const double x = chord_point(a1, a2, th);
            const double w = 1.0 / std::sqrt(x * (a3 - x));
            return std::array<double, 2>{x * w, w};
        },
        0.0, M_PI, q);
    return mo[0] / mo[1];
}

double saturation_functional(const OneCutHard& c, const FieldParams& p, const QuadSpec& q) {
    const auto* r = std::get_if<RealPair>(&c.b);
    if (!r) throw InvalidArgument("saturation functional needs a real b-pair");
    const double b1 = std::min(r->b1, r->b2), b2 = std::max(r->b1, r->b2);
    if (!(c.a1 < b1 && b1 <= b2)) throw InvalidArgument("saturation functional needs a1 < b1 < b2");
    // x = a1 + L s^2
    const double L = b2 - c.a1;
    return integrate(
        [&](double s) {
            const double x = c.a1 + L * s * s;
            return (x - b1) * (x - b2) / (x + p.v) * std::sqrt(L / x) * s * 2.0 * L * s;
        },
        0.0, 1.0, q);
}

double compat_functional(const OneCutSoft& c, const FieldParams& p, const QuadSpec& q) {
    if (!(c.a2 > 0.0 && c.a2 < c.a3)) throw InvalidArgument("compat functional needs 0 < a2 < a3");
    // x = a2 (1 - s^2)
    const double a2 = c.a2;
    return integrate(
        [&](double s) {
            const double x = a2 * (1.0 - s * s);
            return (x - c.b1) / (x + p.v) * std::sqrt(c.a3 - x) * std::sqrt(a2) * s * 2.0 * a2 * s;
        },
        0.0, 1.0, q);
}

double log_potential(const SupportConfig& cfg, const FieldParams& p, double x) {
    const DensityForm f = density_form(cfg, p.v);
    double V = 0.0;
    for (const auto& I : support(cfg)) {
        if (!(I.hi > I.lo)) continue;
        auto term = [&](double s) { return std::log(std::abs(x - s)) * f.density(s); };
        if (x > I.lo && x < I.hi)
            V -= tanh_sinh(term, I.lo, x) + tanh_sinh(term, x, I.hi);
        else
            V -= tanh_sinh(term, I.lo, I.hi);
    }
    return V;
}

double potential_W(const SupportConfig& cfg, const FieldParams& p, double x) {
    const double x0 = support_left(cfg);
    auto W = [&](double y) { return log_potential(cfg, p, y) + phi(p, y); };
    return W(x) - W(x0);
}

}  // namespace gpem
