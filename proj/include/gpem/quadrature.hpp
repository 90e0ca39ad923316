#pragma once

#include <algorithm>
#include <limits>
#include <queue>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gpem/model.hpp"

namespace gpem {

struct QuadSpec {
    int order = 64;         // Gauss–Legendre nodes per panel; checked against order/2
    int refine_limit = 24;  // maximum panel bisection depth
    double tol = 1e-11;
};

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GaussRule {
    std::vector<double> x, w;  // on [-1, 1]
};
const GaussRule& gauss_rule(int n);

namespace detail {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct Panel {
    double lo, hi;
    Vec<N> val;
    double mag;  // integral of max_i |f_i|
    double err;
    bool operator<(const Panel& o) const { return err < o.err; }
};

template <std::size_t N, class F>
Panel<N> make_panel(F& f, double lo, double hi, const GaussRule& hr, const GaussRule& lr) {
    Panel<N> p{lo, hi, {}, 0.0, 0.0};
    const double m = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    for (std::size_t k = 0; k < hr.x.size(); ++k) {
        const Vec<N> y = f(m + h * hr.x[k]);
        double a = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            p.val[i] += hr.w[k] * y[i];
            a = std::max(a, std::abs(y[i]));
        }
        p.mag += hr.w[k] * a;
    }
    Vec<N> c{};
    for (std::size_t k = 0; k < lr.x.size(); ++k) {
        const Vec<N> y = f(m + h * lr.x[k]);
        for (std::size_t i = 0; i < N; ++i) c[i] += lr.w[k] * y[i];
    }
    for (std::size_t i = 0; i < N; ++i) {
        p.val[i] *= h;
        p.err = std::max(p.err, std::abs(p.val[i] - h * c[i]));
    }
    p.mag *= h;
    if (!(p.err == p.err) || !(p.mag == p.mag)) p.err = std::numeric_limits<double>::infinity();
    return p;
}

}  // namespace detail

// Globally adaptive Gauss–Legendre for a vector-valued integrand: the panel with
// the largest order-n vs order-n/2 discrepancy is bisected until the summed
// discrepancy is below tol times the integral of |f|.
template <std::size_t N, class F>
std::array<double, N> integrate_vec(F&& f, double lo, double hi, const QuadSpec& q = {}) {
    std::array<double, N> out{};
    if (!(hi > lo)) return out;
    const GaussRule& hr = gauss_rule(q.order);
    const GaussRule& lr = gauss_rule(q.order / 2);
    const double min_width = (hi - lo) * std::ldexp(1.0, -q.refine_limit);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    std::priority_queue<detail::Panel<N>> work;
    std::vector<detail::Panel<N>> done;
    work.push(detail::make_panel<N>(f, lo, hi, hr, lr));
    double err = work.top().err, mag = work.top().mag;
    while (!work.empty() && err > q.tol * mag) {
        detail::Panel<N> p = work.top();
        work.pop();
        if (p.err <= 64.0 * eps * p.mag) {  // roundoff level: nothing left to gain
            err -= p.err;
            done.push_back(p);
            continue;
        }
        if (p.hi - p.lo <= min_width || !std::isfinite(p.err))
            throw QuadratureError("quadrature did not converge within refine_limit");
        const double mid = 0.5 * (p.lo + p.hi);
        auto l = detail::make_panel<N>(f, p.lo, mid, hr, lr);
        auto r = detail::make_panel<N>(f, mid, p.hi, hr, lr);
        err += l.err + r.err - p.err;
        mag += l.mag + r.mag - p.mag;
        work.push(l);
        work.push(r);
    }
    for (; !work.empty(); work.pop()) done.push_back(work.top());
    std::sort(done.begin(), done.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    for (const auto& p : done)
        for (std::size_t i = 0; i < N; ++i) out[i] += p.val[i];
    return out;
}

template <class F>
double integrate(F&& f, double lo, double hi, const QuadSpec& q = {}) {
    return integrate_vec<1>([&](double x) { return std::array<double, 1>{f(x)}; }, lo, hi, q)[0];
}

// Double-exponential rule for integrands with endpoint singularities (log, 1/sqrt).
template <class F>
double tanh_sinh(F&& f, double lo, double hi, double tol = 1e-13) {
    if (!(hi > lo)) return 0.0;
    const double half = 0.5 * (hi - lo);
    const double pi2 = 0.5 * M_PI;
    auto node = [&](double tau, double& x, double& w) {
        const double s = pi2 * std::sinh(tau);
        const double c = std::cosh(s);
        // distance from the nearer endpoint, computed without cancellation
        const double d = half * std::exp(-std::abs(s)) / c;
        x = tau < 0 ? lo + d : hi - d;
        w = half * pi2 * std::cosh(tau) / (c * c);
    };
    double h = 1.0, sum = 0.0, prev = 0.0;
    const double tmax = 4.0;
    {
        for (double tau = -tmax; tau <= tmax + 1e-12; tau += h) {
            double x, w;
            node(tau, x, w);
            if (x > lo && x < hi) sum += w * f(x);
        }
        prev = sum * h;
    }
    for (int level = 1; level <= 10; ++level) {
        h *= 0.5;
        for (double tau = -tmax + h; tau < tmax; tau += 2 * h) {
            double x, w;
            node(tau, x, w);
            if (x > lo && x < hi) sum += w * f(x);
        }
        const double cur = sum * h;
        if (level >= 3 && std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

// Signed density integrated over the support (substitution removes edge singularities).
double mass_integral(const SupportConfig& cfg, const FieldParams& p, const QuadSpec& q = {});
// nu([0, x]).
double partial_mass(const SupportConfig& cfg, const FieldParams& p, double x,
                    const QuadSpec& q = {});

double gap_condition(const TwoCut& c, const FieldParams& p, const QuadSpec& q = {});
// Numerator and denominator of the centroid that makes the gap condition vanish.
// lo + (hi - lo) cos^2(th/2), i.e. the midpoint map m + h cos(th), evaluated from the
// nearer endpoint so that points close to either end keep full relative accuracy.
inline double chord_point(double lo, double hi, double th) {
    const double w = hi - lo;
    if (th > 0.5 * M_PI) {
        const double c = std::cos(0.5 * th);
        return lo + w * c * c;
    }
    const double sn = std::sin(0.5 * th);
    return hi - w * sn * sn;
}

std::array<double, 2> gap_moments(double a1, double a2, double a3, double v,
                                  const QuadSpec& q = {});
double b1_from_gap(double a1, double a2, double a3, double v, const QuadSpec& q = {});
double xi_robin(double a1, double a2, double a3, const QuadSpec& q = {});

double saturation_functional(const OneCutHard& c, const FieldParams& p, const QuadSpec& q = {});
double compat_functional(const OneCutSoft& c, const FieldParams& p, const QuadSpec& q = {});

// Logarithmic potential V(x) = -∫ log|x-s| dnu(s).
double log_potential(const SupportConfig& cfg, const FieldParams& p, double x);
// W(x) = V(x) + phi(x), shifted so that W = 0 at the leftmost support point.
double potential_W(const SupportConfig& cfg, const FieldParams& p, double x);

}  // namespace gpem
