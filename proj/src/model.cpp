#include "gpem/model.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gpem/quadrature.hpp"

namespace gpem {

namespace {
constexpr double kBoundaryTol = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

void validate(const FieldParams& p) {
    if (!std::isfinite(p.beta) || !std::isfinite(p.gamma) || !std::isfinite(p.t) ||
        !std::isfinite(p.v))
        throw InvalidArgument("field parameters must be finite");
    if (p.gamma == 0.0) throw InvalidArgument("gamma must be nonzero");
    if (!(p.t > 0.0)) throw InvalidArgument("t must be positive");
    if (!(p.v > 0.0)) throw InvalidArgument("v must be positive");
}

FieldParams make_params(double beta, double gamma, double t, double v) {
    FieldParams p{beta, gamma, t, v};
    validate(p);
    return p;
}

double phi(const FieldParams& p, double x) {
    return 0.5 * x * x + p.beta * x + p.gamma * std::log(x + p.v);
}
double dphi(const FieldParams& p, double x) { return x + p.beta + p.gamma / (x + p.v); }
double d2phi(const FieldParams& p, double x) {
    return 1.0 - p.gamma / ((x + p.v) * (x + p.v));
}

Scenario scenario_of(const SupportConfig& cfg) {
    return std::visit(overloaded{[](const OneCutHard&) { return Scenario::OneCutHard; },
                                 [](const OneCutSoft&) { return Scenario::OneCutSoft; },
                                 [](const TwoCut&) { return Scenario::TwoCut; }},
                      cfg);
}

std::string_view scenario_name(Scenario s) {
    switch (s) {
        case Scenario::OneCutHard: return "one-cut-hard";
        case Scenario::OneCutSoft: return "one-cut-soft";
        case Scenario::TwoCut: return "two-cut";
    }
    return "?";
}

BPair bpair_from_sum_product(double s, double q, double a1) {
    const double disc = s * s - 4.0 * q;
    if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        // stable quadratic roots
        const double x1 = s >= 0 ? 0.5 * (s + r) : 0.5 * (s - r);
        const double x2 = x1 != 0.0 ? q / x1 : 0.5 * (s - r);
        auto dist = [a1](double b) { return b < 0 ? -b : (b > a1 ? b - a1 : 0.0); };
        return dist(x1) <= dist(x2) ? BPair{RealPair{x1, x2}} : BPair{RealPair{x2, x1}};
    }
    return ConjPair{0.5 * s, 0.5 * std::sqrt(-disc)};
}

std::pair<double, double> sum_product(const BPair& b) {
    if (const auto* r = std::get_if<RealPair>(&b)) return {r->b1 + r->b2, r->b1 * r->b2};
    const auto& c = std::get<ConjPair>(b);
    return {2.0 * c.re, c.re * c.re + c.im * c.im};
}

std::vector<Interval> support(const SupportConfig& cfg) {
    return std::visit(
        overloaded{[](const OneCutHard& c) { return std::vector<Interval>{{0.0, c.a1}}; },
                   [](const OneCutSoft& c) { return std::vector<Interval>{{c.a2, c.a3}}; },
                   [](const TwoCut& c) {
                       return std::vector<Interval>{{0.0, c.a1}, {c.a2, c.a3}};
                   }},
        cfg);
}

double support_left(const SupportConfig& cfg) { return support(cfg).front().lo; }
double support_right(const SupportConfig& cfg) { return support(cfg).back().hi; }

SupportConfig scale_config(const SupportConfig& cfg, double k) {
    return std::visit(
        overloaded{[k](const OneCutHard& c) -> SupportConfig {
                       if (const auto* r = std::get_if<RealPair>(&c.b))
                           return OneCutHard{k * c.a1, RealPair{k * r->b1, k * r->b2}};
                       const auto& z = std::get<ConjPair>(c.b);
                       return OneCutHard{k * c.a1, ConjPair{k * z.re, k * z.im}};
                   },
                   [k](const OneCutSoft& c) -> SupportConfig {
                       return OneCutSoft{k * c.b1, k * c.a2, k * c.a3};
                   },
                   [k](const TwoCut& c) -> SupportConfig {
                       return TwoCut{k * c.a1, k * c.b1, k * c.a2, k * c.a3};
                   }},
        cfg);
}

std::string describe(const SupportConfig& cfg) {
    std::ostringstream os;
    os.precision(10);
    std::visit(overloaded{[&](const OneCutHard& c) {
                              os << "one-cut-hard a1=" << c.a1;
                              if (const auto* r = std::get_if<RealPair>(&c.b))
                                  os << " b1=" << r->b1 << " b2=" << r->b2;
                              else {
                                  const auto& z = std::get<ConjPair>(c.b);
                                  os << " b=" << z.re << "±" << z.im << "i";
                              }
                          },
                          [&](const OneCutSoft& c) {
                              os << "one-cut-soft b1=" << c.b1 << " a2=" << c.a2
                                 << " a3=" << c.a3;
                          },
                          [&](const TwoCut& c) {
                              os << "two-cut a1=" << c.a1 << " b1=" << c.b1 << " a2=" << c.a2
                                 << " a3=" << c.a3;
                          }},
               cfg);
    return os.str();
}

// ---------------------------------------------------------------------------
// density form

double DensityForm::B(double x) const {
    double r = 1.0;
    for (auto it = bc.rbegin(); it != bc.rend(); ++it) r = r * x + *it;
    return r;
}

std::complex<double> DensityForm::B(std::complex<double> z) const {
    std::complex<double> r = 1.0;
    for (auto it = bc.rbegin(); it != bc.rend(); ++it) r = r * z + *it;
    return r;
}

int DensityForm::sign_on(double x) const {
    int n = 0;
    for (double ai : a)
        if (x < ai) ++n;
    return n;
}

std::complex<double> DensityForm::sqrt_r_upper(double x) const {
    using C = std::complex<double>;
    C val = B(x) / (x + v);
    for (double ai : a) val *= x >= ai ? C(std::sqrt(x - ai), 0.0) : C(0.0, std::sqrt(ai - x));
    if (hard_origin) val /= x > 0 ? C(std::sqrt(x), 0.0) : C(0.0, std::sqrt(-x));
    return val;
}

double DensityForm::density(double x) const { return sqrt_r_upper(x).imag() / M_PI; }

DensityForm density_form(const SupportConfig& cfg, double v) {
    DensityForm f;
    f.v = v;
    std::visit(overloaded{[&](const OneCutHard& c) {
                              f.a = {c.a1};
                              f.hard_origin = true;
                              const auto [s, q] = sum_product(c.b);
                              f.bc = {q, -s};
                          },
                          [&](const OneCutSoft& c) {
                              f.a = {c.a2, c.a3};
                              f.bc = {-c.b1};
                          },
                          [&](const TwoCut& c) {
                              f.a = {c.a1, c.a2, c.a3};
                              f.hard_origin = true;
                              f.bc = {-c.b1};
                          }},
               cfg);
    return f;
}

// ---------------------------------------------------------------------------
// regions

std::string_view region_name(PhaseRegion r) {
    switch (r) {
        case PhaseRegion::A: return "A";
        case PhaseRegion::B: return "B";
        case PhaseRegion::Cplus: return "C+";
        case PhaseRegion::Cminus: return "C-";
        case PhaseRegion::BoundaryBisector: return "boundary-bisector";
        case PhaseRegion::BoundaryTripleRootCurve: return "boundary-triple-root";
        case PhaseRegion::BoundaryTypeIIICurve: return "boundary-type-iii";
        case PhaseRegion::BoundaryPhiZeroCurve: return "boundary-phi-zero";
    }
    return "?";
}

std::pair<std::complex<double>, std::complex<double>> critical_points(double beta, double gamma) {
    return critical_points(FieldParams{beta, gamma, 1.0, 1.0});
}

std::pair<std::complex<double>, std::complex<double>> critical_points(const FieldParams& p) {
    // zeros of (x + beta)(x + v) + gamma
    const double m = -0.5 * (p.beta + p.v);
    const double h = 0.5 * (p.beta - p.v);
    const double d = h * h - p.gamma;
    if (d >= 0.0) {
        const double r = std::sqrt(d);
        // product of the roots is beta*v + gamma; use it for the smaller one
        const double big = m >= 0 ? m + r : m - r;
        const double small = big != 0.0 ? (p.beta * p.v + p.gamma) / big : m - r;
        const double ym = std::min(big, small), yp = std::max(big, small);
        return {{ym, 0.0}, {yp, 0.0}};
    }
    const double r = std::sqrt(-d);
    return {{m, -r}, {m, r}};
}

double twice_phi_at_yplus(double beta, double gamma) {
    const double yp = critical_points(beta, gamma).second.real();
    return (beta - 1.0) * yp + 2.0 * gamma * std::log(yp + 1.0) - beta - gamma;
}

PhaseRegion classify_region(double beta, double gamma) {
    if (beta >= -1.0) {
        const double d = gamma + beta;
        if (std::abs(d) <= kBoundaryTol) return PhaseRegion::BoundaryBisector;
        return d > 0 ? PhaseRegion::A : PhaseRegion::B;
    }
    const double g_tr = std::sqrt(-1.0 - 2.0 * beta);
    const double g_iii = std::pow((3.0 - 2.0 * beta) / 5.0, 2.5);
    if (std::abs(gamma - g_tr) <= kBoundaryTol) return PhaseRegion::BoundaryTripleRootCurve;
    if (std::abs(gamma - g_iii) <= kBoundaryTol) return PhaseRegion::BoundaryTypeIIICurve;
    if (gamma < g_tr) return PhaseRegion::B;
    if (gamma > g_iii) return PhaseRegion::A;
    // C: the minimum of phi sits at the origin unless y+ is real, positive and
    // lower than phi(0) = 0.
    const auto [ym, yp] = critical_points(beta, gamma);
    if (yp.imag() != 0.0) return PhaseRegion::Cplus;
    const double f = twice_phi_at_yplus(beta, gamma);
    if (std::abs(f) <= kBoundaryTol) return PhaseRegion::BoundaryPhiZeroCurve;
    return f > 0 ? PhaseRegion::Cplus : PhaseRegion::Cminus;
}

// ---------------------------------------------------------------------------
// scaling

FieldParams rescale(double b, double c, double v, double t_real) {
    if (!(v > 0.0)) throw InvalidArgument("v must be positive");
    return FieldParams{2.0 * b / v, 2.0 * c / (v * v), t_real / (v * v), 1.0};
}

RealLineField unrescale(const FieldParams& p, double v) {
    if (!(v > 0.0)) throw InvalidArgument("v must be positive");
    return RealLineField{0.5 * p.beta * v, 0.5 * p.gamma * v * v, v, p.t * v * v};
}

double RealLineMeasure::density(double y) const {
    if (y == 0.0) {
        // |y| nu'(y^2) stays finite at a hard origin: sqrt(x) nu'(x) -> B(0) sqrt|A(0)| / (pi v)
        if (!half.hard_origin) return 0.0;
        double a0 = 1.0;
        for (double a : half.a) a0 *= a;
        return std::max(half.B(0.0) * std::sqrt(std::abs(a0)) / (M_PI * half.v), 0.0);
    }
    const double x = y * y;
    return std::abs(y) * std::max(half.density(x), 0.0);
}

RealLineMeasure halfline_to_realline(const SupportConfig& cfg, double v) {
    RealLineMeasure m;
    m.half = density_form(cfg, v);
    const auto iv = support(cfg);
    for (auto it = iv.rbegin(); it != iv.rend(); ++it)
        m.intervals.push_back({-std::sqrt(it->hi), -std::sqrt(it->lo)});
    for (const auto& i : iv) {
        if (i.lo == 0.0) {
            // the hard-edge cut and its mirror merge into one interval
            m.intervals.back().hi = std::sqrt(i.hi);
            continue;
        }
        m.intervals.push_back({std::sqrt(i.lo), std::sqrt(i.hi)});
    }
    return m;
}

int realline_cut_count(Scenario s) {
    switch (s) {
        case Scenario::OneCutHard: return 1;
        case Scenario::OneCutSoft: return 2;
        case Scenario::TwoCut: return 3;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// v -> 0 limits

double quartic_poly(const FieldParams& p, double y) {
    const double b = p.beta, g = p.gamma, t = p.t;
    return (((3.0 * y + 4.0 * b) * y + (b * b + 2.0 * (g - t))) * y) * y - g * g;
}

QuarticLimit quartic_b1_recipe(const FieldParams& p) {
    if (!(p.gamma < 0.0)) throw InvalidArgument("quartic recipe needs gamma < 0");
    if (!(p.t > 0.0)) throw InvalidArgument("t must be positive");
    const double b = p.beta, g = p.gamma, t = p.t;
    Eigen::Matrix<double, 5, 1> coef;
    coef << -g * g, 0.0, b * b + 2.0 * (g - t), 4.0 * b, 3.0;
    Eigen::PolynomialSolver<double, 4> solver;
    solver.compute(coef);
    std::vector<QuarticLimit> admissible;
    for (const auto& r : solver.roots()) {
        if (std::abs(r.imag()) > 1e-6 * (1.0 + std::abs(r.real()))) continue;
        double y = r.real();
        for (int k = 0; k < 8; ++k) {
            const double d = ((12.0 * y + 12.0 * b) * y + 2.0 * (b * b + 2.0 * (g - t))) * y;
            if (d == 0.0) break;
            y -= quartic_poly(p, y) / d;
        }
        if (!(y < 0.0)) continue;
        const double disc = -2.0 * y * y - 2.0 * b * y + 2.0 * (t - g);
        if (disc < 0.0) continue;
        const double mid = -(y + b), h = std::sqrt(disc);
        const double a2 = mid - h, a3 = mid + h;
        if (!(a2 > 0.0 && a3 > a2)) continue;
        // residue condition b1 * sqrt(a2 a3) = gamma fixes the sign
        if (std::abs(y * std::sqrt(a2 * a3) - g) > 1e-8 * (1.0 + std::abs(g))) continue;
        admissible.push_back({y, a2, a3});
    }
    if (admissible.empty())
        throw InvalidArgument("no admissible negative root of the quartic");
    if (admissible.size() > 1) {
        // keep the root in (-inf, -beta), the one the limit density selects
        std::vector<QuarticLimit> inside;
        for (const auto& q : admissible)
            if (q.b1 < -b) inside.push_back(q);
        if (inside.size() == 1) return inside.front();
        throw InvalidArgument("quartic recipe is ambiguous for these parameters");
    }
    return admissible.front();
}

double LimitDensity::density(double x) const {
    if (x <= lo || x >= hi) return 0.0;
    if (form == Form::HardEdge) return (x - root) * std::sqrt((hi - x) / x) / M_PI;
    return std::sqrt((x - lo) * (hi - x)) / M_PI;
}

double LimitDensity::mass() const {
    if (form == Form::HardEdge) {
        // x = hi sin^2(th)
        return integrate(
            [&](double th) {
                const double s = std::sin(th), c = std::cos(th);
                const double x = hi * s * s;
                return (x - root) * 2.0 * hi * c * c / M_PI;
            },
            0.0, 0.5 * M_PI);
    }
    // x = mid + h cos(th)
    const double h = 0.5 * (hi - lo);
    return integrate(
        [&](double th) {
            const double s = std::sin(th);
            return h * h * s * s / M_PI;
        },
        0.0, M_PI);
}

MeasureLimit limit_measure_v0(const FieldParams& p) {
    if (!(p.gamma > 0.0)) throw InvalidArgument("limit measure needs gamma > 0");
    if (!(p.t > 0.0)) throw InvalidArgument("t must be positive");
    MeasureLimit out;
    if (p.t <= p.gamma) {
        out.atom_mass = p.t;
        return out;
    }
    out.atom_mass = p.gamma;
    const double m = p.t - p.gamma, b = p.beta;
    const double r = std::sqrt(2.0 * m);
    if (b <= -r) {
        out.ac_part = LimitDensity{LimitDensity::Form::SoftEdge, -b - r, -b + r, 0.0};
    } else {
        const double s = std::sqrt(b * b + 6.0 * m);
        out.ac_part = LimitDensity{LimitDensity::Form::HardEdge, 0.0, (-2.0 * b + 2.0 * s) / 3.0,
                                   (-2.0 * b - s) / 3.0};
    }
    return out;
}

TransitionLoci transition_loci(double beta) {
    if (!(beta < -1.0)) throw InvalidArgument("transition loci need beta < -1");
    TransitionLoci l{};
    l.gamma_triple_root = std::sqrt(-1.0 - 2.0 * beta);
    l.gamma_type_iii = std::pow((3.0 - 2.0 * beta) / 5.0, 2.5);
    l.t_triple_root = 0.5 * (beta + 1.0) * (beta + 1.0) + beta + l.gamma_triple_root;
    l.a1_type_iii = -2.0 * (beta + 1.0) / 5.0;
    const double a = l.a1_type_iii;
    l.t_type_iii = l.gamma_type_iii - 15.0 * a * a / 8.0 - 2.5 * a - 1.0;
    return l;
}

}  // namespace gpem
