#include "gpem/flow.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace gpem {

namespace {

double guard(double d) {
    if (!(std::abs(d) >= 1e-13)) throw CollisionSingularity("root collision: vanishing denominator");
    return d;
}

// Hard-edge rates from the coefficients of P(z) = 2B'A + BA' (dots = derivatives).
Vec hard_from_P(const Vec& x, double P2, double P1, double P0) {
    const double a1 = x[0], s = x[1], q = x[2];
    const double Ba1 = guard(a1 * a1 - s * a1 + q);
    const double da1 = -(P0 + a1 * P1 + a1 * a1 * P2) / Ba1;
    const double ds = -0.5 * (P2 + da1);
    const double dq = 0.5 * (P1 + a1 * P2 + da1 * (a1 - s));
    return Vec{{da1, ds, dq}};
}

double poly(const std::vector<double>& c, double z) {
    double r = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * z + *it;
    return r;
}

// Zeros of A*q (support endpoints including a hard origin).
std::vector<double> aq_roots(Scenario s, const Vec& x) {
    switch (s) {
        case Scenario::OneCutHard: return {0.0, x[0]};
        case Scenario::OneCutSoft: return {x[1], x[2]};
        case Scenario::TwoCut: return {0.0, x[0], x[2], x[3]};
    }
    return {};
}

// H(-v) and H'(-v) from the double-pole behaviour of d/dv sqrt(R) at -v.
std::pair<double, double> h_at_pole(Scenario s, const Vec& x, const FieldParams& p) {
    const auto r = aq_roots(s, x);
    double prod = 1.0, logd = 0.0;
    for (double ri : r) {
        prod *= std::abs(-p.v - ri);
        logd += 0.5 / (-p.v - ri);
    }
    const double branch = (r.size() / 2) % 2 == 0 ? std::sqrt(prod) : -std::sqrt(prod);
    const double H = -p.gamma * branch;
    return {H, H * logd};
}

std::vector<double> h_coeffs(Scenario s, const Vec& x, const FieldParams& p, const QuadSpec& q) {
    const auto [H, dH] = h_at_pole(s, x, p);
    const double v = p.v;
    if (s != Scenario::TwoCut) {
        // H = C (z - h1)
        const double C = dH;
        const double h1 = -v - H / C;
        return {-C * h1, C};
    }
    // H = c0 + c1 z + c2 z^2 with zero period over the gap
    const double a1 = x[0], a2 = x[2], a3 = x[3];
    const auto M = integrate_vec<3>(
        [&](double th) {
            const double z = chord_point(a1, a2, th);
            const double w = 1.0 / ((z + v) * (z + v) * std::sqrt(z * (a3 - z)));
            return std::array<double, 3>{w, z * w, z * z * w};
        },
        0.0, M_PI, q);
    Eigen::Matrix3d A;
    A << 1.0, -v, v * v,  //
        0.0, 1.0, -2.0 * v,  //
        M[0], M[1], M[2];
    const Eigen::Vector3d c = A.fullPivLu().solve(Eigen::Vector3d(H, dH, 0.0));
    return {c[0], c[1], c[2]};
}

}  // namespace

Vec rate_t(Scenario s, const Vec& x, const FieldParams& p, const QuadSpec& q) {
    const double v = p.v;
    switch (s) {
        case Scenario::OneCutHard:
            // 2B'A + BA' = -2(z + v)
            return hard_from_P(x, 0.0, -2.0, -2.0 * v);
        case Scenario::OneCutSoft: {
            const double b1 = x[0], a2 = x[1], a3 = x[2];
            return Vec{{(b1 + v) / guard((b1 - a2) * (b1 - a3)),
                        2.0 * (a2 + v) / guard((a2 - b1) * (a2 - a3)),
                        2.0 * (a3 + v) / guard((a3 - b1) * (a3 - a2))}};
        }
        case Scenario::TwoCut: {
            const double a1 = x[0], b1 = x[1], a2 = x[2], a3 = x[3];
            const double xi = xi_robin(a1, a2, a3, q);
            // 2B'A + BA' = -2(z + v)(z - xi)
            return Vec{{2.0 * (a1 + v) * (a1 - xi) / guard((a1 - b1) * (a1 - a2) * (a1 - a3)),
                        (b1 + v) * (b1 - xi) / guard((b1 - a1) * (b1 - a2) * (b1 - a3)),
                        2.0 * (a2 + v) * (a2 - xi) / guard((a2 - b1) * (a2 - a1) * (a2 - a3)),
                        2.0 * (a3 + v) * (a3 - xi) / guard((a3 - b1) * (a3 - a1) * (a3 - a2))}};
        }
    }
    return {};
}

Vec rate_v(Scenario s, const Vec& x, const FieldParams& p, const QuadSpec& q) {
    const double v = p.v;
    const auto H = h_coeffs(s, x, p, q);
    switch (s) {
        case Scenario::OneCutHard: {
            // (z + v) P(z) - 2 A B = 2 H, deg H = 1: match z^3, z^2, z^1
            // (the z^0 coefficient is then automatic)
            const double a1 = x[0], sb = x[1], qb = x[2];
            const double P2 = 2.0;
            const double P1 = -v * P2 - 2.0 * (sb + a1);
            const double P0 = 2.0 * H[1] + 2.0 * (qb + a1 * sb) - v * P1;
            return hard_from_P(x, P2, P1, P0);
        }
        case Scenario::OneCutSoft: {
            const double b1 = x[0], a2 = x[1], a3 = x[2];
            return Vec{{-poly(H, b1) / guard((b1 + v) * (b1 - a2) * (b1 - a3)),
                        -2.0 * poly(H, a2) / guard((a2 + v) * (a2 - b1) * (a2 - a3)),
                        -2.0 * poly(H, a3) / guard((a3 + v) * (a3 - b1) * (a3 - a2))}};
        }
        case Scenario::TwoCut: {
            const double a1 = x[0], b1 = x[1], a2 = x[2], a3 = x[3];
            return Vec{
                {-2.0 * poly(H, a1) / guard((a1 + v) * (a1 - b1) * (a1 - a2) * (a1 - a3)),
                 -poly(H, b1) / guard((b1 + v) * (b1 - a1) * (b1 - a2) * (b1 - a3)),
                 -2.0 * poly(H, a2) / guard((a2 + v) * (a2 - b1) * (a2 - a1) * (a2 - a3)),
                 -2.0 * poly(H, a3) / guard((a3 + v) * (a3 - b1) * (a3 - a1) * (a3 - a2))}};
        }
    }
    return {};
}

namespace {

SupportConfig to_root_rates(const SupportConfig& cfg, const Vec& d) {
    if (const auto* h = std::get_if<OneCutHard>(&cfg)) {
        const double da1 = d[0], ds = d[1], dq = d[2];
        if (const auto* r = std::get_if<RealPair>(&h->b)) {
            const double den = guard(r->b1 - r->b2);
            return OneCutHard{da1, RealPair{(ds * r->b1 - dq) / den, (dq - ds * r->b2) / den}};
        }
        const auto& z = std::get<ConjPair>(h->b);
        const double dre = 0.5 * ds;
        return OneCutHard{da1, ConjPair{dre, (dq - 2.0 * z.re * dre) / guard(2.0 * z.im)}};
    }
    return unpack(scenario_of(cfg), d);
}

}  // namespace

SupportConfig rhs_t(const SupportConfig& cfg, const FieldParams& p, const QuadSpec& q) {
    const Scenario s = scenario_of(cfg);
    return to_root_rates(cfg, rate_t(s, pack(cfg), p, q));
}

SupportConfig rhs_v(const SupportConfig& cfg, const FieldParams& p, const QuadSpec& q) {
    const Scenario s = scenario_of(cfg);
    return to_root_rates(cfg, rate_v(s, pack(cfg), p, q));
}

std::vector<double> neutral_numerator(const SupportConfig& cfg, const FieldParams& p,
                                      const QuadSpec& q) {
    return h_coeffs(scenario_of(cfg), pack(cfg), p, q);
}

std::vector<double> neutral_zeros(const SupportConfig& cfg, const FieldParams& p,
                                  const QuadSpec& q) {
    const auto c = neutral_numerator(cfg, p, q);
    if (c.size() == 2) return {-c[0] / c[1]};
    const double d = c[1] * c[1] - 4.0 * c[2] * c[0];
    if (d < 0) return {};
    const double r = std::sqrt(d);
    double z1 = (-c[1] - r) / (2.0 * c[2]), z2 = (-c[1] + r) / (2.0 * c[2]);
    if (z1 > z2) std::swap(z1, z2);
    return {z1, z2};
}

std::vector<double> geometric_grid(double from, double to, int n) {
    std::vector<double> g;
    if (n < 2) return {to};
    const double l0 = std::log(from), l1 = std::log(to);
    for (int i = 0; i < n; ++i) g.push_back(std::exp(l0 + (l1 - l0) * i / (n - 1)));
    g.front() = from;
    g.back() = to;
    return g;
}

TrackOptions flow_track_options(Family::Param param, const FlowOptions& o) {
    TrackOptions to;
    to.solver.quad = o.quad;
    to.ode_tol = o.ode_tol;
    to.event_tol = o.event_tol;
    const QuadSpec quad = o.quad;
    if (param == Family::Param::T)
        to.rate = [quad](Scenario s, const Vec& x, const FieldParams& fp) {
            return rate_t(s, x, fp, quad);
        };
    else
        to.rate = [quad](Scenario s, const Vec& x, const FieldParams& fp) {
            return rate_v(s, x, fp, quad);
        };
    return to;
}

Trajectory evolve_t(const FieldParams& p, double t_start, double t_end, const FlowOptions& o) {
    if (!(t_start > 0.0 && t_end > t_start)) throw InvalidArgument("need 0 < t_start < t_end");
    FieldParams p0 = p;
    p0.t = t_start;
    validate(p0);
    TrackOptions to = flow_track_options(Family::Param::T, o);
    const SolveReport start = solve_at(p0, std::nullopt, to.solver);
    Family fam{Family::Param::T, p.beta, p.gamma, p.v};
    to.grid = geometric_grid(t_start, t_end, o.samples);
    return track(fam, t_start, scenario_of(start.config), pack(start.config), t_end, to)
        .trajectory;
}

Trajectory evolve_v(const FieldParams& p, double v_start, double v_end, const FlowOptions& o) {
    if (!(v_start > v_end && v_end > 0.0)) throw InvalidArgument("need v_start > v_end > 0");
    FieldParams p0 = p;
    p0.v = v_start;
    validate(p0);
    TrackOptions to = flow_track_options(Family::Param::V, o);
    const SolveReport start = solve_at(p0, std::nullopt, to.solver);
    Family fam{Family::Param::V, p.beta, p.gamma, p.t};
    to.grid = geometric_grid(v_start, v_end, o.samples);
    return track(fam, v_start, scenario_of(start.config), pack(start.config), v_end, to)
        .trajectory;
}

}  // namespace gpem
