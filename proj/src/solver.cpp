#include "gpem/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace gpem {

namespace {

// Truncated power series c0 + c1 w + c2 w^2.
struct Series {
    std::array<double, 3> c{1.0, 0.0, 0.0};
    Series operator*(const Series& o) const {
        Series r;
        r.c[0] = c[0] * o.c[0];
        r.c[1] = c[0] * o.c[1] + c[1] * o.c[0];
        r.c[2] = c[0] * o.c[2] + c[1] * o.c[1] + c[2] * o.c[0];
        return r;
    }
};

Series sqrt_one_minus(double a) { return Series{{1.0, -0.5 * a, -0.125 * a * a}}; }

struct Roots {
    std::vector<double> a;
    bool hard;
    std::vector<double> bc;  // monic B, low to high without leading 1
};

Roots roots_of(Scenario s, const Vec& x) {
    switch (s) {
        case Scenario::OneCutHard: return {{x[0]}, true, {x[2], -x[1]}};
        case Scenario::OneCutSoft: return {{x[1], x[2]}, false, {-x[0]}};
        case Scenario::TwoCut: return {{x[0], x[2], x[3]}, true, {-x[1]}};
    }
    return {};
}

double length_scale(Scenario s, const Vec& x, const FieldParams& p) {
    double m = 0.0;
    if (s == Scenario::OneCutHard)
        m = std::max({std::abs(x[0]), std::abs(x[1]), std::sqrt(std::abs(x[2]))});
    else
        m = x.cwiseAbs().maxCoeff();
    return 1.0 + p.v + std::abs(p.beta) + m;
}

}  // namespace

ResidualSystem ResidualSystem::of(Scenario s) {
    return {s, s == Scenario::TwoCut ? 4 : 3};
}

Vec pack(const SupportConfig& cfg) {
    return std::visit(
        [](const auto& c) -> Vec {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, OneCutHard>) {
                const auto [s, q] = sum_product(c.b);
                return Vec{{c.a1, s, q}};
            } else if constexpr (std::is_same_v<T, OneCutSoft>) {
                return Vec{{c.b1, c.a2, c.a3}};
            } else {
                return Vec{{c.a1, c.b1, c.a2, c.a3}};
            }
        },
        cfg);
}

SupportConfig unpack(Scenario s, const Vec& x) {
    switch (s) {
        case Scenario::OneCutHard:
            return OneCutHard{x[0], bpair_from_sum_product(x[1], x[2], x[0])};
        case Scenario::OneCutSoft: return OneCutSoft{x[0], x[1], x[2]};
        case Scenario::TwoCut: return TwoCut{x[0], x[1], x[2], x[3]};
    }
    throw InvalidArgument("unknown scenario");
}

bool in_domain(Scenario s, const Vec& x, double v) {
    if (!x.allFinite()) return false;
    switch (s) {
        case Scenario::OneCutHard: return x.size() == 3 && x[0] > 0.0;
        case Scenario::OneCutSoft: return x.size() == 3 && x[1] > -v && x[2] > x[1];
        case Scenario::TwoCut:
            return x.size() == 4 && x[0] > 0.0 && x[2] > x[0] && x[3] > x[2];
    }
    return false;
}

Expansion expand(Scenario s, const Vec& x, double v) {
    const Roots r = roots_of(s, x);
    // B(z)/z^m in w = 1/z
    Series g;
    const std::size_t m = r.bc.size();
    g.c[1] = r.bc[m - 1];
    g.c[2] = m >= 2 ? r.bc[m - 2] : 0.0;
    g = g * Series{{1.0, -v, v * v}};
    for (double ai : r.a) g = g * sqrt_one_minus(ai);

    // residue of sqrt(R) at -v, continuing sqrt(A/q) from +inf along the upper side
    double Bv = 1.0;
    for (auto it = r.bc.rbegin(); it != r.bc.rend(); ++it) Bv = Bv * (-v) + *it;
    double aq = 1.0;
    for (double ai : r.a) aq *= std::abs(-v - ai);
    if (r.hard) aq /= v;
    const int k = (static_cast<int>(r.a.size()) - (r.hard ? 1 : 0)) / 2;
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    return {g.c[1], g.c[2], Bv * sign * std::sqrt(aq)};
}

Vec residuals(Scenario s, const Vec& x, const FieldParams& p, const QuadSpec& q) {
    const int n = ResidualSystem::of(s).dim;
    if (x.size() != n) throw InvalidArgument("unknown vector does not match the scenario");
    if (!in_domain(s, x, p.v)) throw SolveError(SolveError::Kind::DomainExit, "unknowns outside the scenario domain");
    const Expansion e = expand(s, x, p.v);
    Vec r(n);
    r[0] = e.g1 - p.beta;
    r[1] = e.g2 - (p.gamma - p.t);
    r[2] = e.residue - p.gamma;
    if (s == Scenario::TwoCut) {
        const auto mo = gap_moments(x[0], x[2], x[3], p.v, q);
        r[3] = mo[0] / mo[1] - x[1];
    }
    return r;
}

Vec residuals_v(Scenario s, const Vec& x, const FieldParams& p, const QuadSpec& q) {
    return residuals(s, x, p, q);
}

Vec scaled_residuals(Scenario s, const Vec& x, const FieldParams& p, const QuadSpec& q) {
    Vec r = residuals(s, x, p, q);
    const double L = length_scale(s, x, p);
    r[0] /= L;
    r[1] /= L * L;
    r[2] /= std::abs(p.gamma);
    if (s == Scenario::TwoCut) r[3] /= L;
    return r;
}

// ---------------------------------------------------------------------------

NewtonResult newton(Scenario s, const Vec& guess, const FieldParams& p, const SolverOptions& o) {
    const int n = ResidualSystem::of(s).dim;
    Vec x = guess;
    if (!in_domain(s, x, p.v))
        throw SolveError(SolveError::Kind::DomainExit, "initial guess outside the scenario domain");
    auto F = [&](const Vec& y) { return scaled_residuals(s, y, p, o.quad); };
    Vec r = F(x);
    double nr = r.lpNorm<Eigen::Infinity>();
    const bool positive_first = s != Scenario::OneCutSoft;

    for (int it = 0; it <= o.max_iter; ++it) {
        const double L = length_scale(s, x, p);
        Eigen::MatrixXd J(n, n);
        for (int j = 0; j < n; ++j) {
            double h = 6e-6 * std::max(std::abs(x[j]), 1e-3 * L);
            if (j == 0 && positive_first) h = std::min(h, 0.5 * x[0]);
            if (s == Scenario::TwoCut && (j == 0 || j == 2))
                h = std::min(h, 0.25 * (x[2] - x[0]));
            if (s == Scenario::TwoCut && (j == 2 || j == 3))
                h = std::min(h, 0.25 * (x[3] - x[2]));
            Vec xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const bool okp = in_domain(s, xp, p.v), okm = in_domain(s, xm, p.v);
            if (okp && okm)
                J.col(j) = (F(xp) - F(xm)) / (2.0 * h);
            else if (okp)
                J.col(j) = (F(xp) - r) / h;
            else if (okm)
                J.col(j) = (r - F(xm)) / h;
            else
                throw SolveError(SolveError::Kind::DomainExit, "Jacobian stencil leaves the domain");
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (lu.rank() < n || !std::isfinite(lu.rcond()) || lu.rcond() < 1e-15)
            throw SolveError(SolveError::Kind::SingularJacobian, "singular Jacobian");
        const Vec dx = lu.solve(-r);
        const double step = dx.lpNorm<Eigen::Infinity>() / (1.0 + x.lpNorm<Eigen::Infinity>());
        if (nr < o.tol && step < 1e-12) return {x, nr, it};
        if (nr < 1e-3 * o.tol && it > 0) return {x, nr, it};
        if (it == o.max_iter) break;

        double lam = 1.0;
        bool accepted = false;
        Vec xt, rt;
        for (int k = 0; k < 30; ++k, lam *= 0.5) {
            xt = x + lam * dx;
            if (!in_domain(s, xt, p.v)) continue;
            try {
                rt = F(xt);
            } catch (const QuadratureError&) {
                continue;
            }
            if (rt.lpNorm<Eigen::Infinity>() < nr) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (nr < o.tol) return {x, nr, it};  // at the noise floor
            throw SolveError(SolveError::Kind::DomainExit, "line search could not reduce the residual");
        }
        x = xt;
        r = rt;
        nr = r.lpNorm<Eigen::Infinity>();
    }
    throw SolveError(SolveError::Kind::MaxIterations, "Newton iteration limit reached");
}

SolveReport newton_solve(const ResidualSystem& sys, const Vec& guess, const FieldParams& p,
                         const SolverOptions& o) {
    if (guess.size() != sys.dim) throw InvalidArgument("guess has the wrong dimension");
    const NewtonResult nr = newton(sys.scenario, guess, p, o);
    SolveReport rep;
    rep.config = unpack(sys.scenario, nr.x);
    rep.residual_norm = nr.residual_norm;
    rep.iterations = nr.iterations;
    rep.validity = check_validity(rep.config, p, o.quad);
    return rep;
}

// ---------------------------------------------------------------------------

Validity check_validity(const SupportConfig& cfg, const FieldParams& p, const QuadSpec& q) {
    Validity v;
    const double L = 1.0 + std::abs(support_right(cfg));
    // ordering
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, OneCutHard>) {
                if (!(c.a1 > 0.0)) {
                    v.reason = "a1 must be positive";
                } else if (const auto* r = std::get_if<RealPair>(&c.b)) {
                    auto outside = [&](double b) { return b < 0.0 || b > c.a1; };
                    v.ordering = outside(r->b1) && outside(r->b2);
                    if (!v.ordering) v.reason = "real b-root inside the support";
                } else {
                    v.ordering = std::get<ConjPair>(c.b).im > 0.0;
                    if (!v.ordering) v.reason = "conjugate pair with zero imaginary part";
                }
            } else if constexpr (std::is_same_v<T, OneCutSoft>) {
                v.ordering = c.a2 > 0.0 && c.a3 > c.a2 && c.b1 < c.a2;
                if (!v.ordering) v.reason = "one-cut-soft ordering violated";
            } else {
                v.ordering = c.a1 > 0.0 && c.a1 < c.b1 && c.b1 < c.a2 && c.a2 < c.a3;
                if (!v.ordering) v.reason = "two-cut ordering violated";
            }
        },
        cfg);
    if (!v.ordering) return v;

    // density sign on 256 interior samples
    const DensityForm f = density_form(cfg, p.v);
    const auto iv = support(cfg);
    const int per = 256 / static_cast<int>(iv.size());
    v.density_nonnegative = true;
    for (const auto& I : iv) {
        for (int k = 0; k < per; ++k) {
            const double th = M_PI * (k + 0.5) / per;
            const double x = I.lo + (I.hi - I.lo) * 0.5 * (1.0 - std::cos(th));
            if (f.density(x) < -1e-12) {
                v.density_nonnegative = false;
                v.reason = "negative density on the support";
                return v;
            }
        }
    }

    // inequality integrals
    v.inequalities = true;
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, OneCutHard>) {
                if (const auto* r = std::get_if<RealPair>(&c.b)) {
                    if (r->b1 > c.a1 && r->b2 > c.a1 &&
                        saturation_functional(c, p, q) < -1e-12 * L * L * L) {
                        v.inequalities = false;
                        v.reason = "saturation functional negative";
                    }
                }
            } else if constexpr (std::is_same_v<T, OneCutSoft>) {
                if (c.b1 > 0.0 && compat_functional(c, p, q) < -1e-12 * L * L * L) {
                    v.inequalities = false;
                    v.reason = "compatibility functional negative";
                }
            } else {
                if (std::abs(gap_condition(c, p, q)) > 1e-9) {
                    v.inequalities = false;
                    v.reason = "gap condition violated";
                }
            }
        },
        cfg);
    return v;
}

}  // namespace gpem
