#include "gpem/continuation.hpp"
#include "gpem/flow.hpp"  // rate_t for the rate-driven fallback

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace gpem {

std::string_view event_name(EventKind k) {
    switch (k) {
        case EventKind::TypeIBirth: return "TypeI_birth";
        case EventKind::TypeIIMerge: return "TypeII_merge";
        case EventKind::TypeIIISoftCollision: return "TypeIII_softcollision";
        case EventKind::OriginSoftToHard: return "OriginSoftToHard";
        case EventKind::TripleRootAtOrigin: return "TripleRootAtOrigin";
        case EventKind::ComplexPairCollision: return "ComplexPairCollision";
        case EventKind::ComplexPairFormation: return "ComplexPairFormation";
        case EventKind::GapOpening: return "GapOpening";
        case EventKind::CutDeath: return "CutDeath";
    }
    return "?";
}

FieldParams Family::at(double value) const {
    return param == Param::T ? FieldParams{beta, gamma, value, fixed}
                             : FieldParams{beta, gamma, fixed, value};
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPostShift = 1e-8;  // relative parameter offset for post-event states

bool crossed(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    return (a > 0 && b <= 0) || (a < 0 && b >= 0);
}

double scale_of(Scenario s, const Vec& x, const FieldParams& p) {
    double m = 0.0;
    if (s == Scenario::OneCutHard)
        m = std::max({std::abs(x[0]), std::abs(x[1]), std::sqrt(std::abs(x[2]))});
    else
        m = x.cwiseAbs().maxCoeff();
    return 1.0 + p.v + std::abs(p.beta) + m;
}

struct Point {
    double u;
    Vec x;
};

// Real roots r1 <= r2 of z^2 - s z + q (requires nonnegative discriminant).
std::pair<double, double> real_roots(double s, double q) {
    const double d = std::sqrt(std::max(s * s - 4.0 * q, 0.0));
    const double x1 = s >= 0 ? 0.5 * (s + d) : 0.5 * (s - d);
    const double x2 = x1 != 0.0 ? q / x1 : 0.5 * (s - d);
    return {std::min(x1, x2), std::max(x1, x2)};
}

class Tracker {
public:
    Tracker(const Family& f, const TrackOptions& o, double from, double to)
        : fam_(f), opt_(o), dir_(to >= from ? 1.0 : -1.0) {
        traj_.parameter = std::string(f.name());
    }

    TrackResult run(double from, Scenario sc, const Vec& x0, double to);

private:
    const Family& fam_;
    const TrackOptions& opt_;
    double dir_;
    double u_end_ = 0.0;
    Trajectory traj_;
    std::size_t grid_i_ = 0;
    std::vector<std::pair<double, double>> psi_hist_;

    FieldParams at_u(double u) const { return fam_.at(std::exp(u)); }
    double tol_u(double u) const {
        return std::max(0.5 * opt_.event_tol / std::exp(u), 8e-16 * std::max(1.0, std::abs(u)));
    }
    Vec solve(Scenario sc, const Vec& guess, double u) const {
        return newton(sc, guess, at_u(u), opt_.solver).x;
    }

    std::array<double, 4> event_values(Scenario sc, const Vec& x, double u) const;
    std::optional<Vec> rk45(Scenario sc, const Point& cur, double h, double& err) const;
    Vec rate_u(Scenario sc, const Vec& x, double u) const {
        const double pv = std::exp(u);
        return pv * opt_.rate(sc, x, fam_.at(pv));
    }

    void sample(double u, const SupportConfig& c) {
        if (!opt_.record) return;
        const double pv = std::exp(u);
        if (!traj_.samples.empty() && dir_ * (pv - traj_.samples.back().param) <= 0) return;
        traj_.samples.push_back({pv, c});
    }
    void skip_grid(double u) {
        while (grid_i_ < opt_.grid.size() && dir_ * (std::log(opt_.grid[grid_i_]) - u) <= 0)
            ++grid_i_;
    }

    // Bracketed root of event component `idx` along the branch between a and b.
    std::pair<Point, Point> locate(Scenario sc, int idx, const Point& a, const Point& b) const;
    std::optional<Point> post_state(Scenario to, const std::vector<Vec>& seeds, double u) const;
    Scenario handle_event(Scenario sc, int idx, const Point& pre, const Point& post, Point& out);
    bool handle_two_cut_degeneration(Point& cur, Scenario& sc, const std::optional<Point>& prev);
    void check_type_iii(const Point& cur);
    std::optional<std::pair<double, double>> type_iii_point(double u, double a1) const;
    void record_type_iii(double u, double a1, const SupportConfig& pre, const SupportConfig& post);
    bool jump_type_iii(Point& cur);
    [[noreturn]] void fail(const std::string& why, double u) const {
        std::ostringstream os;
        os << why << " at " << traj_.parameter << "=" << std::exp(u);
        throw SolveError(SolveError::Kind::Stall, os.str());
    }
};

std::array<double, 4> Tracker::event_values(Scenario sc, const Vec& x, double u) const {
    std::array<double, 4> e{kNaN, kNaN, kNaN, kNaN};
    const FieldParams p = at_u(u);
    const double L = scale_of(sc, x, p);
    try {
        if (sc == Scenario::OneCutSoft) {
            e[0] = x[1] / L;
            if (x[1] > 0.0 && x[2] > x[1])
                e[1] = compat_functional(OneCutSoft{x[0], x[1], x[2]}, p, opt_.solver.quad) /
                       (L * L * L);
        } else if (sc == Scenario::OneCutHard) {
            const double a1 = x[0], s = x[1], q = x[2];
            const double disc = s * s - 4.0 * q;
            e[0] = disc / (L * L);
            e[3] = q / (L * L);
            if (disc >= 0.0) {
                const auto [r1, r2] = real_roots(s, q);
                e[2] = (a1 - r1) * (a1 - r2) / (L * L);
                if (r1 > a1)
                    e[1] = saturation_functional(OneCutHard{a1, RealPair{r1, r2}}, p,
                                                 opt_.solver.quad) /
                           (L * L * L);
            }
        }
    } catch (const std::exception&) {
    }
    return e;
}

std::optional<Vec> Tracker::rk45(Scenario sc, const Point& cur, double h, double& err) const {
    // Dormand–Prince 5(4)
    static constexpr double c2 = 1. / 5, c3 = 3. / 10, c4 = 4. / 5, c5 = 8. / 9;
    static constexpr double a21 = 1. / 5;
    static constexpr double a31 = 3. / 40, a32 = 9. / 40;
    static constexpr double a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
    static constexpr double a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561,
                            a54 = -212. / 729;
    static constexpr double a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247,
                            a64 = 49. / 176, a65 = -5103. / 18656;
    static constexpr double b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192, b5 = -2187. / 6784,
                            b6 = 11. / 84;
    static constexpr double e1 = 71. / 57600, e3 = -71. / 16695, e4 = 71. / 1920,
                            e5 = -17253. / 339200, e6 = 22. / 525, e7 = -1. / 40;
    const double u = cur.u, dh = dir_ * h;
    const Vec& x = cur.x;
    try {
        auto f = [&](double uu, const Vec& y) {
            if (!in_domain(sc, y, at_u(uu).v))
                throw SolveError(SolveError::Kind::DomainExit, "stage left domain");
            return rate_u(sc, y, uu);
        };
        const Vec k1 = f(u, x);
        const Vec k2 = f(u + c2 * dh, x + dh * a21 * k1);
        const Vec k3 = f(u + c3 * dh, x + dh * (a31 * k1 + a32 * k2));
        const Vec k4 = f(u + c4 * dh, x + dh * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec k5 = f(u + c5 * dh, x + dh * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec k6 =
            f(u + dh, x + dh * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vec y = x + dh * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vec k7 = f(u + dh, y);
        const Vec ev = dh * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double L = scale_of(sc, x, at_u(u));
        err = ev.lpNorm<Eigen::Infinity>() / (opt_.ode_tol * L);
        if (!y.allFinite()) return std::nullopt;
        return y;
    } catch (const std::exception&) {  // collisions and quadrature failures reject the step
        return std::nullopt;
    }
}

std::pair<Point, Point> Tracker::locate(Scenario sc, int idx, const Point& a,
                                        const Point& b) const {
    auto guess = [&](double u) -> Vec {
        const double w = (u - a.u) / (b.u - a.u);
        return (1.0 - w) * a.x + w * b.x;
    };
    auto g = [&](double u) {
        const Vec x = solve(sc, guess(u), u);
        return event_values(sc, x, u)[idx];
    };
    const double fa = event_values(sc, a.x, a.u)[idx];
    const double fb = event_values(sc, b.x, b.u)[idx];
    if (fb == 0.0) return {a, b};
    double lo = std::min(a.u, b.u), hi = std::max(a.u, b.u);
    double flo = a.u < b.u ? fa : fb, fhi = a.u < b.u ? fb : fa;
    const double tol = tol_u(0.5 * (lo + hi));
    boost::uintmax_t iters = 200;
    auto stop = [tol](double l, double r) { return std::abs(r - l) <= tol; };
    auto br = boost::math::tools::toms748_solve(g, lo, hi, flo, fhi, stop, iters);
    // order the bracket so that .first lies on the pre-event side
    double up = dir_ > 0 ? br.first : br.second;
    double uq = dir_ > 0 ? br.second : br.first;
    Point pre{up, solve(sc, guess(up), up)};
    Point post{uq, solve(sc, guess(uq), uq)};
    return {pre, post};
}

std::optional<Point> Tracker::post_state(Scenario to, const std::vector<Vec>& seeds,
                                         double u) const {
    const FieldParams p = at_u(u);
    for (const Vec& s : seeds) {
        if (!in_domain(to, s, p.v)) continue;
        try {
            const Vec x = solve(to, s, u);
            if (check_validity(unpack(to, x), p, opt_.solver.quad).ok()) return Point{u, x};
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

Scenario Tracker::handle_event(Scenario sc, int idx, const Point& pre, const Point& post,
                               Point& out) {
    const double ue = 0.5 * (pre.u + post.u);
    const double un = ue + dir_ * std::max(kPostShift, 4.0 * tol_u(ue));
    const FieldParams pe = at_u(ue);
    const Vec& x = pre.x;
    const double L = scale_of(sc, x, pe);
    TransitionEvent ev;
    ev.time = std::exp(ue);
    ev.pre_scenario = sc;
    ev.pre = unpack(sc, x);
    Scenario next = sc;
    std::optional<Point> res;
    // continuation of the current branch just past the event, used to seed
    Vec xc = post.x;
    try {
        xc = solve(sc, post.x, un);
    } catch (const std::exception&) {
    }

    if (sc == Scenario::OneCutSoft && idx == 0) {
        const bool triple = std::abs(x[0]) < 1e-5 * L;
        ev.kind = triple ? EventKind::TripleRootAtOrigin : EventKind::OriginSoftToHard;
        ev.location = 0.0;
        next = Scenario::OneCutHard;
        std::vector<Vec> seeds;
        for (double e : {1e-8, 1e-6, 1e-4, 1e-3})
            seeds.push_back(Vec{{x[2], x[0] - e * L, -x[0] * e * L}});
        seeds.push_back(Vec{{x[2], x[0], 0.0}});
        seeds.push_back(Vec{{x[2], 0.0, 0.0}});
        res = post_state(next, seeds, un);
    } else if (sc == Scenario::OneCutSoft && idx == 1) {
        ev.kind = EventKind::TypeIBirth;
        ev.location = 0.0;
        next = Scenario::TwoCut;
        const double b1 = xc[0], a2 = xc[1], a3 = xc[2];
        const FieldParams pn = at_u(un);
        double rate = 1.0;
        try {
            const double xi = xi_robin(1e-12 * a2, a2, a3, opt_.solver.quad);
            rate = std::abs(2.0 * pn.v * xi / (b1 * a2 * a3));
        } catch (const std::exception&) {
        }
        const double dparam = std::abs(std::exp(un) - std::exp(ue));
        std::vector<Vec> seeds;
        for (double k : {1.0, 0.3, 3.0, 0.1, 10.0, 0.01, 100.0}) {
            const double a1 = std::min(k * rate * dparam, 0.5 * b1);
            seeds.push_back(Vec{{a1, b1, a2, a3}});
        }
        res = post_state(next, seeds, un);
    } else if (sc == Scenario::OneCutHard && idx == 0) {
        const double x0 = 0.5 * x[1];
        const double after = event_values(sc, xc, un)[0];
        if (after > 0 && x0 > 0 && x0 < x[0]) {
            ev.kind = EventKind::GapOpening;
            ev.location = x0;
            next = Scenario::TwoCut;
            std::vector<Vec> seeds;
            for (double e : {1e-4, 1e-3, 1e-5, 1e-2, 1e-6})
                seeds.push_back(Vec{{x0 - e * L, x0, x0 + e * L, xc[0]}});
            res = post_state(next, seeds, un);
        } else {
            ev.kind = after >= 0 ? EventKind::ComplexPairCollision
                                 : EventKind::ComplexPairFormation;
            ev.location = x0;
            res = Point{un, xc};
        }
    } else if (sc == Scenario::OneCutHard && idx == 1) {
        const auto [r1, r2] = real_roots(x[1], x[2]);
        ev.kind = EventKind::TypeIBirth;
        ev.location = r2;
        next = Scenario::TwoCut;
        std::vector<Vec> seeds;
        for (double e : {1e-4, 1e-3, 1e-5, 1e-2, 1e-6, 3e-2})
            seeds.push_back(Vec{{xc[0], r1, r2 - e * L, r2 + e * L}});
        res = post_state(next, seeds, un);
    } else if (sc == Scenario::OneCutHard && idx == 3) {
        // a real b-root reaches the origin and enters the support: the hard edge
        // turns into a soft edge
        const auto [r1, r2] = real_roots(x[1], x[2]);
        const double other = std::abs(r1) > std::abs(r2) ? r1 : r2;
        ev.kind = EventKind::OriginSoftToHard;
        ev.location = 0.0;
        next = Scenario::OneCutSoft;
        std::vector<Vec> seeds;
        for (double e : {1e-8, 1e-6, 1e-4, 1e-3, 1e-2})
            seeds.push_back(Vec{{other, e * L, xc[0]}});
        res = post_state(next, seeds, un);
    } else {
        fail("unsupported transition (real b-root crossing the soft edge)", ue);
    }
    if (!res) fail(std::string("no valid configuration after ") + std::string(event_name(ev.kind)), ue);
    ev.post_scenario = next;
    ev.post = unpack(next, res->x);
    out = *res;
    if (opt_.record) {
        sample(ue, ev.pre);
        sample(out.u, ev.post);
    }
    traj_.events.push_back(ev);
    psi_hist_.clear();
    return next;
}

// Two-cut configurations cannot be continued through a closing gap, a vanishing
// cut, or a cut shrinking onto the origin; the transition time is found on the
// neighbouring one-cut branch where it is a plain sign change.
bool Tracker::handle_two_cut_degeneration(Point& cur, Scenario& sc,
                                          const std::optional<Point>& prev) {
    const FieldParams p = at_u(cur.u);
    const Vec& x = cur.x;
    const double L = scale_of(sc, x, p);
    const double a1 = x[0], b1 = x[1], a2 = x[2], a3 = x[3];
    Scenario nb;
    Vec seed;
    int idx;
    bool want_positive;
    EventKind kind;
    // only shrinking features count (a gap that has just opened is small too)
    auto shrinking = [&](auto width) {
        return !prev || prev->x.size() != 4 || width(x) < width(prev->x);
    };
    if ((a2 - a1) / L < opt_.gap_trigger && shrinking([](const Vec& y) { return y[2] - y[0]; })) {
        nb = Scenario::OneCutHard;
        seed = Vec{{a3, a1 + a2, a1 * a2}};
        idx = 0;  // discriminant turns negative at the merge
        want_positive = false;
        kind = EventKind::TypeIIMerge;
    } else if ((a3 - a2) / L < opt_.gap_trigger &&
               shrinking([](const Vec& y) { return y[3] - y[2]; })) {
        const double m = 0.5 * (a2 + a3);
        nb = Scenario::OneCutHard;
        seed = Vec{{a1, b1 + m, b1 * m}};
        idx = 1;  // saturation functional turns positive
        want_positive = true;
        kind = EventKind::CutDeath;
    } else if (a1 / L < 1e-9 && shrinking([](const Vec& y) { return y[0]; })) {
        nb = Scenario::OneCutSoft;
        seed = Vec{{b1, a2, a3}};
        idx = 1;  // compatibility functional turns positive
        want_positive = true;
        kind = EventKind::CutDeath;
    } else {
        return false;
    }
    Point a{cur.u, Vec()};
    try {
        a.x = solve(nb, seed, cur.u);
    } catch (const std::exception&) {
        fail("neighbouring branch not found near a two-cut degeneration", cur.u);
    }
    double fa = event_values(nb, a.x, a.u)[idx];
    auto done = [&](double f) { return want_positive ? f > 0 : f < 0; };
    if (!std::isfinite(fa)) fail("event function undefined on the neighbouring branch", cur.u);
    if (done(fa)) {
        // already past: the event happened inside the last step; search backwards
        fail("two-cut degeneration detected after the transition", cur.u);
    }
    double du = std::max(1e-9, 1e-6 * std::abs(cur.u));
    Point b = a;
    double fb = fa;
    for (int k = 0; k < 200; ++k) {
        if (dir_ * (b.u - u_end_) >= 0.0) return false;  // the degeneration lies past the target
        Point c{b.u + dir_ * du, Vec()};
        if (dir_ * (c.u - u_end_) > 0.0) c.u = u_end_;
        try {
            c.x = solve(nb, b.x, c.u);
        } catch (const std::exception&) {
            du *= 0.5;
            if (du < 1e-15) break;
            continue;
        }
        const double fc = event_values(nb, c.x, c.u)[idx];
        if (std::isfinite(fc) && done(fc)) {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            break;
        }
        b = c;
        fb = fc;
        du *= 2.0;
    }
    if (!done(fb)) fail("could not bracket the two-cut degeneration", cur.u);
    const auto [pre, post] = locate(nb, idx, a, b);
    const double ue = 0.5 * (pre.u + post.u);
    const double un = ue + dir_ * std::max(kPostShift, 4.0 * tol_u(ue));
    Vec xn;
    try {
        xn = solve(nb, post.x, un);
    } catch (const std::exception&) {
        fail("post-transition solve failed", un);
    }
    const FieldParams pn = at_u(un);
    if (!check_validity(unpack(nb, xn), pn, opt_.solver.quad).ok())
        fail("post-transition configuration invalid", un);
    TransitionEvent ev;
    ev.kind = kind;
    ev.time = std::exp(ue);
    ev.pre_scenario = Scenario::TwoCut;
    ev.post_scenario = nb;
    ev.pre = unpack(Scenario::TwoCut, cur.x);
    ev.post = unpack(nb, xn);
    if (kind == EventKind::TypeIIMerge)
        ev.location = 0.5 * pre.x[1];
    else if (nb == Scenario::OneCutHard)
        ev.location = real_roots(pre.x[1], pre.x[2]).second;
    else
        ev.location = 0.0;
    if (opt_.record) {
        sample(ue, unpack(nb, pre.x));
        sample(un, ev.post);
    }
    traj_.events.push_back(ev);
    psi_hist_.clear();
    cur = Point{un, xn};
    sc = nb;
    skip_grid(un);
    return true;
}

// Tangency of the b-pair with a1: B = (z - a1)^2 leaves three residuals in two unknowns
// (a1, u); Gauss-Newton reaches a zero-residual point only on the critical curve.
std::optional<std::pair<double, double>> Tracker::type_iii_point(double u, double a1) const {
    auto r = [&](double a, double uu) {
        return scaled_residuals(Scenario::OneCutHard, Vec{{a, 2.0 * a, a * a}}, at_u(uu),
                                opt_.solver.quad);
    };
    Vec z{{a1, u}};
    for (int it = 0; it < 60; ++it) {
        const Vec r0 = r(z[0], z[1]);
        if (r0.norm() < 1e-14) break;
        Eigen::Matrix<double, Eigen::Dynamic, 2> J(r0.size(), 2);
        const double ha = 1e-7 * std::max(1.0, std::abs(z[0])), hu = 1e-7;
        J.col(0) = (r(z[0] + ha, z[1]) - r(z[0] - ha, z[1])) / (2.0 * ha);
        J.col(1) = (r(z[0], z[1] + hu) - r(z[0], z[1] - hu)) / (2.0 * hu);
        Vec dz = J.colPivHouseholderQr().solve(-r0);
        double lam = 1.0;
        while (lam > 1e-4 && (z[0] + lam * dz[0] <= 0.0 || r(z[0] + lam * dz[0], z[1] + lam * dz[1]).norm() >= r0.norm()))
            lam *= 0.5;
        if (lam <= 1e-4) break;
        z += lam * dz;
        if ((lam * dz).norm() < 1e-15 * (1.0 + z.norm())) break;
    }
    if (!(r(z[0], z[1]).norm() < 1e-9)) return std::nullopt;
    return std::make_pair(z[1], z[0]);
}

void Tracker::record_type_iii(double u, double a1, const SupportConfig& pre,
                              const SupportConfig& post) {
    TransitionEvent ev;
    ev.kind = EventKind::TypeIIISoftCollision;
    ev.time = std::exp(u);
    ev.location = a1;
    ev.pre_scenario = ev.post_scenario = Scenario::OneCutHard;
    ev.pre = pre;
    ev.post = post;
    traj_.events.push_back(ev);
    psi_hist_.clear();
}

void Tracker::check_type_iii(const Point& cur) {
    const Vec& x = cur.x;
    const double a1 = x[0], s = x[1], q = x[2];
    const double L = scale_of(Scenario::OneCutHard, x, at_u(cur.u));
    const double disc = s * s - 4.0 * q;
    if (disc >= 0.0 && real_roots(s, q).first <= a1) {
        psi_hist_.clear();
        return;
    }
    const double psi = (a1 * a1 - s * a1 + q) / (L * L);
    psi_hist_.push_back({cur.u, psi});
    if (psi_hist_.size() > 3) psi_hist_.erase(psi_hist_.begin());
    if (psi_hist_.size() < 3) return;
    const auto& h = psi_hist_;
    if (!(h[1].second < h[0].second && h[1].second <= h[2].second)) return;
    const double lo = std::min(h[0].first, h[2].first), hi = std::max(h[0].first, h[2].first);
    Vec guess = x;
    auto f = [&](double u) {
        try {
            const Vec y = solve(Scenario::OneCutHard, guess, u);
            const double Ly = scale_of(Scenario::OneCutHard, y, at_u(u));
            return (y[0] * y[0] - y[1] * y[0] + y[2]) / (Ly * Ly);
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const auto m = boost::math::tools::brent_find_minima(f, lo, hi, 50);
    if (m.second < opt_.type_iii_tol) {
        const Vec y = solve(Scenario::OneCutHard, guess, m.first);
        const SupportConfig c = unpack(Scenario::OneCutHard, y);
        if (const auto tp = type_iii_point(m.first, y[0]))
            record_type_iii(tp->first, tp->second, c, c);
        else
            record_type_iii(m.first, y[0], c, c);
    }
    psi_hist_.clear();
}

// Step across a tangency where the hard-edge system is singular.
bool Tracker::jump_type_iii(Point& cur) {
    const Vec& x = cur.x;
    const double L = scale_of(Scenario::OneCutHard, x, at_u(cur.u));
    const double psi = (x[0] * x[0] - x[1] * x[0] + x[2]) / (L * L);
    if (!(psi < 1e-4)) return false;
    const auto tp = type_iii_point(cur.u, x[0]);
    if (!tp || dir_ * (tp->first - cur.u) < -1e-9 || std::abs(tp->first - cur.u) > 0.05)
        return false;
    const double ue = tp->first, ae = tp->second;
    for (double d : {1e-8, 1e-7, 1e-6, 1e-5, 1e-4}) {
        const double un = ue + dir_ * d;
        std::vector<Vec> seeds;
        for (double eta : {1e-4, 1e-3, 1e-2, 1e-1}) {
            const double e2 = eta * eta * ae * ae;
            seeds.push_back(Vec{{ae, 2.0 * ae, ae * ae + e2}});
            seeds.push_back(Vec{{ae, 2.0 * ae, ae * ae - e2}});
            seeds.push_back(Vec{{ae * (1.0 + eta), 2.0 * ae, ae * ae + e2}});
        }
        if (auto post = post_state(Scenario::OneCutHard, seeds, un)) {
            const double pl = scale_of(Scenario::OneCutHard, post->x, at_u(un));
            const Vec& y = post->x;
            if ((y[0] * y[0] - y[1] * y[0] + y[2]) / (pl * pl) < 1e-14) continue;
            record_type_iii(ue, ae, unpack(Scenario::OneCutHard, x),
                            unpack(Scenario::OneCutHard, y));
            sample(un, unpack(Scenario::OneCutHard, y));
            cur = *post;
            skip_grid(un);
            return true;
        }
    }
    return false;
}

TrackResult Tracker::run(double from, Scenario sc, const Vec& x0, double to) {
    const double u_end = std::log(to);
    u_end_ = u_end;
    Point cur{std::log(from), x0};
    std::optional<Point> prev;
    skip_grid(cur.u - dir_ * 1e-15);
    sample(cur.u, unpack(sc, cur.x));
    if (grid_i_ < opt_.grid.size() && std::abs(std::log(opt_.grid[grid_i_]) - cur.u) < 1e-14)
        ++grid_i_;
    double h = opt_.h0;
    std::array<double, 4> ev_cur = event_values(sc, cur.x, cur.u);
    long steps = 0;

    while (dir_ * (u_end - cur.u) > 1e-14 * std::max(1.0, std::abs(u_end))) {
        if (++steps > opt_.max_steps) fail("step limit reached", cur.u);
        h = std::min({h, opt_.hmax, std::abs(u_end - cur.u)});
        bool on_grid = false;
        if (grid_i_ < opt_.grid.size()) {
            const double ug = std::log(opt_.grid[grid_i_]);
            if (dir_ * (ug - cur.u) <= h) {
                h = std::abs(ug - cur.u);
                on_grid = true;
            }
        }
        if (std::abs(u_end - cur.u) <= h * (1 + 1e-12)) h = std::abs(u_end - cur.u);
        const double un = std::abs(u_end - cur.u) <= h ? u_end : cur.u + dir_ * h;
        const FieldParams pn = at_u(un);
        const double L = scale_of(sc, cur.x, pn);

        Vec guess = cur.x;
        double grow = 1.5;
        if (opt_.rate) {
            double err = 0.0;
            auto y = rk45(sc, cur, h, err);
            if (y && err <= 1.0) {
                guess = *y;
                grow = std::min(4.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2));
            } else if (h > 1e3 * opt_.hmin) {
                h *= y ? std::max(0.1, 0.9 * std::pow(err, -0.2)) : 0.25;
                if (sc == Scenario::OneCutHard && h < 1e-6 && jump_type_iii(cur)) {
                    prev.reset();
                    ev_cur = event_values(sc, cur.x, cur.u);
                    h = std::max(opt_.h0 * 0.01, 1e3 * opt_.hmin);
                }
                continue;
            } else if (prev) {
                guess = cur.x + (cur.x - prev->x) * (h / std::abs(cur.u - prev->u));
            }
        } else if (prev) {
            guess = cur.x + (cur.x - prev->x) * (h / std::abs(cur.u - prev->u));
            if (!in_domain(sc, guess, pn.v)) guess = cur.x;
        }

        Vec xn;
        int iters = 0;
        try {
            const NewtonResult nr = newton(sc, guess, pn, opt_.solver);
            xn = nr.x;
            iters = nr.iterations;
        } catch (const std::exception&) {
            if (sc == Scenario::TwoCut && handle_two_cut_degeneration(cur, sc, prev)) {
                prev.reset();
                ev_cur = event_values(sc, cur.x, cur.u);
                h = opt_.h0 * 0.1;
                continue;
            }
            h *= 0.5;
            if (sc == Scenario::OneCutHard && h < 1e-6 && jump_type_iii(cur)) {
                prev.reset();
                ev_cur = event_values(sc, cur.x, cur.u);
                h = std::max(opt_.h0 * 0.01, 1e3 * opt_.hmin);
                continue;
            }
            if (h < opt_.hmin) fail("step size underflow", cur.u);
            continue;
        }
        // reject jumps to a different solution branch
        if ((xn - guess).lpNorm<Eigen::Infinity>() > 0.05 * L &&
            (xn - cur.x).lpNorm<Eigen::Infinity>() > 0.05 * L) {
            h *= 0.5;
            if (h < opt_.hmin) fail("step size underflow", cur.u);
            continue;
        }

        const Point next{un, xn};
        const auto ev_next = event_values(sc, xn, un);
        // earliest sign change among the event functions
        std::optional<std::pair<Point, Point>> best;
        int best_idx = -1;
        for (int i = 0; i < 4; ++i) {
            if (!crossed(ev_cur[i], ev_next[i])) continue;
            try {
                auto br = locate(sc, i, cur, next);
                const bool earlier = !best || dir_ * (br.first.u - best->first.u) < -tol_u(cur.u) ||
                                     (std::abs(br.first.u - best->first.u) <= tol_u(cur.u) && i == 0 &&
                                      sc == Scenario::OneCutSoft);
                if (earlier) {
                    best = br;
                    best_idx = i;
                }
            } catch (const std::exception&) {
                // the sign change may be numerical noise in an inactive function
            }
        }
        if (best) {
            Point out;
            sc = handle_event(sc, best_idx, best->first, best->second, out);
            cur = out;
            prev.reset();
            ev_cur = event_values(sc, cur.x, cur.u);
            skip_grid(cur.u);
            h = std::max(opt_.h0 * 0.01, 1e3 * opt_.hmin);
            continue;
        }

        prev = cur;
        cur = next;
        ev_cur = ev_next;
        if (on_grid) {
            sample(cur.u, unpack(sc, cur.x));
            ++grid_i_;
        }
        if (sc == Scenario::OneCutHard) check_type_iii(cur);
        if (sc == Scenario::TwoCut && handle_two_cut_degeneration(cur, sc, prev)) {
            prev.reset();
            ev_cur = event_values(sc, cur.x, cur.u);
            h = std::max(opt_.h0 * 0.01, 1e3 * opt_.hmin);
            continue;
        }
        if (opt_.rate)
            h *= grow;
        else
            h *= iters <= 3 ? 1.6 : (iters >= 8 ? 0.5 : 1.0);
    }
    sample(cur.u, unpack(sc, cur.x));
    return {std::move(traj_), sc, cur.x};
}

}  // namespace

TrackResult track(const Family& fam, double from, Scenario sc, const Vec& x0, double to,
                  const TrackOptions& opt) {
    Tracker t(fam, opt, from, to);
    return t.run(from, sc, x0, to);
}

// ---------------------------------------------------------------------------
// solve_at: continuation in t from a small-mass seed

namespace {

std::vector<std::pair<Scenario, Vec>> small_t_seeds(double beta, double gamma, double t0) {
    const auto [ym, yp] = critical_points(beta, gamma);
    std::vector<std::pair<Scenario, Vec>> hard, soft;
    if (beta + gamma > 0.0) {
        const double a1 = 2.0 * t0 / (beta + gamma);
        hard.push_back({Scenario::OneCutHard, Vec{{a1, -(beta + 1.0), beta + gamma}}});
    } else {
        hard.push_back({Scenario::OneCutHard, Vec{{std::sqrt(t0), -(beta + 1.0), beta + gamma}}});
    }
    if (yp.imag() == 0.0 && yp.real() > 0.0) {
        const double y = yp.real();
        const double kappa = 1.0 - gamma / ((y + 1.0) * (y + 1.0));
        if (kappa > 0.0) {
            const double d = 2.0 * std::sqrt(t0 / kappa);
            soft.push_back({Scenario::OneCutSoft, Vec{{ym.real(), y - d, y + d}}});
        }
    }
    const PhaseRegion r = classify_region(beta, gamma);
    std::vector<std::pair<Scenario, Vec>> out;
    const bool soft_first = r == PhaseRegion::B || r == PhaseRegion::Cminus;
    auto& first = soft_first ? soft : hard;
    auto& second = soft_first ? hard : soft;
    out.insert(out.end(), first.begin(), first.end());
    out.insert(out.end(), second.begin(), second.end());
    return out;
}

SolveReport finish(const SupportConfig& cfg, const FieldParams& p, const SolverOptions& o) {
    SolveReport rep;
    rep.config = cfg;
    const Scenario s = scenario_of(cfg);
    rep.residual_norm = scaled_residuals(s, pack(cfg), p, o.quad).lpNorm<Eigen::Infinity>();
    rep.validity = check_validity(cfg, p, o.quad);
    return rep;
}

}  // namespace

SolveReport solve_at(const FieldParams& p, std::optional<SupportConfig> hint,
                     const SolverOptions& o) {
    validate(p);
    if (hint) {
        const Scenario s = scenario_of(*hint);
        try {
            const NewtonResult nr = newton(s, pack(*hint), p, o);
            SolveReport rep = finish(unpack(s, nr.x), p, o);
            rep.iterations = nr.iterations;
            if (rep.validity.ok()) return rep;
        } catch (const std::exception&) {
        }
    }
    if (p.v != 1.0) {
        // solve the normalized field and scale back; when that t-track fails (large
        // rescaled parameters), continue in v from the unit-pole solution instead
        std::string why;
        try {
            const FieldParams q{p.beta / p.v, p.gamma / (p.v * p.v), p.t / (p.v * p.v), 1.0};
            SolveReport r = solve_at(q, std::nullopt, o);
            const SupportConfig cfg = scale_config(r.config, p.v);
            const Scenario s = scenario_of(cfg);
            const NewtonResult nr = newton(s, pack(cfg), p, o);
            SolveReport rep = finish(unpack(s, nr.x), p, o);
            rep.iterations = nr.iterations;
            if (rep.validity.ok()) return rep;
            why = rep.validity.reason;
        } catch (const std::exception& e) {
            why = e.what();
        }
        try {
            const SolveReport r1 = solve_at(FieldParams{p.beta, p.gamma, p.t, 1.0}, std::nullopt, o);
            Family fam;
            fam.param = Family::Param::V;
            fam.beta = p.beta;
            fam.gamma = p.gamma;
            fam.fixed = p.t;
            TrackOptions topt;
            topt.solver = o;
            topt.record = false;
            const Scenario s1 = scenario_of(r1.config);
            const TrackResult tr = track(fam, 1.0, s1, pack(r1.config), p.v, topt);
            SolveReport rep = finish(unpack(tr.scenario, tr.x), p, o);
            if (rep.validity.ok()) return rep;
            why = rep.validity.reason;
        } catch (const std::exception& e) {
            why += std::string("; v-continuation: ") + e.what();
        }
        throw SolveError(SolveError::Kind::NoValidScenario, "no valid scenario: " + why);
    }

    Family fam;
    fam.beta = p.beta;
    fam.gamma = p.gamma;
    fam.fixed = 1.0;
    TrackOptions topt;
    topt.solver = o;
    topt.record = false;
    topt.h0 = 0.05;
    topt.hmax = 0.25;
    std::string last_error = "no seed converged";
    // secant tracking first; short-lived phases (near the type-III curve) need the
    // analytic rate to be resolved
    for (int pass = 0; pass < 2; ++pass) {
        if (pass == 1)
            topt.rate = [q = o.quad](Scenario s, const Vec& x, const FieldParams& fp) { return rate_t(s, x, fp, q); };
        for (double t0 : {1e-4, 1e-6, 1e-8, 1e-3}) {
            const double ts = std::min(t0, 0.5 * p.t);
            for (const auto& [sc, seed] : small_t_seeds(p.beta, p.gamma, ts)) {
                try {
                    const FieldParams ps{p.beta, p.gamma, ts, 1.0};
                    const NewtonResult nr = newton(sc, seed, ps, o);
                    if (!check_validity(unpack(sc, nr.x), ps, o.quad).ok()) continue;
                    const TrackResult tr = track(fam, ts, sc, nr.x, p.t, topt);
                    SolveReport rep = finish(unpack(tr.scenario, tr.x), p, o);
                    if (rep.validity.ok()) return rep;
                    last_error = rep.validity.reason;
                } catch (const std::exception& e) {
                    last_error = e.what();
                }
            }
        }
    }
    throw SolveError(SolveError::Kind::NoValidScenario, "no valid scenario: " + last_error);
}

}  // namespace gpem
