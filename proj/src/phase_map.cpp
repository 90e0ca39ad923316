#include "gpem/phase_map.hpp"

#include <boost/math/tools/roots.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>

namespace gpem {

std::vector<int> expected_sequence(PhaseRegion r) {
    switch (r) {
        case PhaseRegion::A: return {1};
        case PhaseRegion::B: return {2, 1};
        case PhaseRegion::Cplus: return {1, 3, 1};
        case PhaseRegion::Cminus: return {2, 3, 1};
        default: return {};
    }
}

namespace {

// The hard-edge phase is final once no b-root can still reach the positive axis.
bool terminal(Scenario s, const Vec& x) {
    if (s != Scenario::OneCutHard) return false;
    const double sum = x[1], prod = x[2];
    const double disc = sum * sum - 4.0 * prod;
    const double top = disc < 0.0 ? 0.5 * sum : 0.5 * (sum + std::sqrt(disc));
    return top < 0.0;
}

void push_count(std::vector<int>& seq, Scenario s) {
    const int c = realline_cut_count(s);
    if (seq.empty() || seq.back() != c) seq.push_back(c);
}

}  // namespace

PhaseCell phase_sequence(double beta, double gamma, const PhaseOptions& o) {
    PhaseCell cell;
    cell.beta = beta;
    cell.gamma = gamma;
    cell.region = classify_region(beta, gamma);
    if (gamma == 0.0) {
        cell.error = "excluded: gamma must be nonzero";
        return cell;
    }
    try {
        const FieldParams p0 = make_params(beta, gamma, o.t_start);
        TrackOptions to = flow_track_options(Family::Param::T, o.flow);
        to.record = false;
        const SolveReport start = solve_at(p0, std::nullopt, to.solver);
        Family fam{Family::Param::T, beta, gamma, 1.0};
        Scenario sc = scenario_of(start.config);
        Vec x = pack(start.config);
        push_count(cell.sequence, sc);
        double t0 = o.t_start, t1 = std::max(o.t_first, 2.0 * o.t_start);
        for (;;) {
            // event records are kept even when samples are not
            TrackResult tr = track(fam, t0, sc, x, t1, to);
            for (const auto& e : tr.trajectory.events) {
                cell.times.push_back({e.kind, e.time});
                push_count(cell.sequence, e.post_scenario);
            }
            sc = tr.scenario;
            x = tr.x;
            cell.t_final = t1;
            if (terminal(sc, x) || t1 >= o.t_cap) break;
            t0 = t1;
            t1 = std::min(4.0 * t1, o.t_cap);
        }
        if (!terminal(sc, x)) cell.error = "hard-edge phase not terminal by t_cap";
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

std::vector<PhaseCell> phase_grid(const Range& beta, const Range& gamma, int jobs,
                                  const PhaseOptions& o) {
    const int n = beta.n * gamma.n;
    std::vector<PhaseCell> cells(n);
    if (jobs <= 0) jobs = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (int k = 0; k < n; ++k) cells[k] = phase_sequence(beta.at(k % beta.n), gamma.at(k / beta.n), o);
    return cells;
}

std::vector<PhaseCell> phase_grid_serial(const Range& beta, const Range& gamma,
                                         const PhaseOptions& o) {
    std::vector<PhaseCell> cells;
    for (int j = 0; j < gamma.n; ++j)
        for (int i = 0; i < beta.n; ++i) cells.push_back(phase_sequence(beta.at(i), gamma.at(j), o));
    return cells;
}

std::vector<CurvePoint> boundary_curves(double beta_lo, double beta_hi, int n) {
    std::vector<CurvePoint> out;
    const Range r{beta_lo, beta_hi, std::max(n, 2)};
    for (int i = 0; i < r.n; ++i) {
        const double b = r.at(i);
        if (b > -1.0) {
            out.push_back({"bisector", b, 0.0 - b});
            continue;
        }
        if (b == -1.0) continue;
        const TransitionLoci L = transition_loci(b);
        out.push_back({"triple_root", b, L.gamma_triple_root});
        out.push_back({"type_iii", b, L.gamma_type_iii});
        // phi(y+) = 0 between the two: scan for the sign change, then refine
        auto f = [&](double g) {
            const auto yp = critical_points(b, g).second;
            return yp.imag() != 0.0 || yp.real() <= 0.0 ? 1.0 : twice_phi_at_yplus(b, g);
        };
        const int m = 200;
        const double g0 = L.gamma_triple_root, g1 = L.gamma_type_iii;
        double prev_g = g0 + 1e-9 * (g1 - g0), prev_f = f(prev_g);
        for (int k = 1; k <= m; ++k) {
            const double g = g0 + (g1 - g0) * k / m * (1.0 - 1e-9);
            const double fg = f(g);
            if ((prev_f < 0.0) != (fg < 0.0)) {
                boost::uintmax_t it = 100;
                const auto br = boost::math::tools::toms748_solve(
                    f, prev_g, g, prev_f, fg,
                    [](double a, double c) { return std::abs(c - a) < 1e-13 * (1 + std::abs(a)); }, it);
                out.push_back({"phi_zero", b, 0.5 * (br.first + br.second)});
                break;
            }
            prev_g = g;
            prev_f = fg;
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const CurvePoint& a, const CurvePoint& b) { return a.curve < b.curve; });
    return out;
}

namespace {

FieldParams vc_params(double v) {
    return FieldParams{0.0, -1.0 / (2.0 * v * v), 1.0 / (2.0 * v * v), 1.0};
}

// Soft-edge branch sampled on a coarse v-grid (a2 may be negative: the branch is
// continued past admissibility to expose the sign change).
class VcBranch {
public:
    VcBranch() {
        const SolveReport r = solve_at(vc_params(kLo));
        if (scenario_of(r.config) != Scenario::OneCutSoft)
            throw SolveError(SolveError::Kind::NoValidScenario, "v_c: no soft-edge solution at the lower bracket");
        Vec x = pack(r.config);
        for (int i = 0; i <= kSteps; ++i) {
            const double v = kLo + (kHi - kLo) * i / kSteps;
            x = newton(Scenario::OneCutSoft, x, vc_params(v)).x;
            pts_[v] = x;
        }
    }
    double a2(double v) const {
        auto it = pts_.lower_bound(v);
        if (it == pts_.end()) --it;
        Vec x = it->second;
        // walk from the nearest grid point in small steps
        const double from = it->first;
        const int k = 4;
        for (int i = 1; i <= k; ++i)
            x = newton(Scenario::OneCutSoft, x, vc_params(from + (v - from) * i / k)).x;
        return x[1];
    }
    static constexpr double kLo = 0.2, kHi = 0.4;
    static constexpr int kSteps = 40;

private:
    std::map<double, Vec> pts_;
};

}  // namespace

double vc_a2(double v) { return VcBranch().a2(v); }

double find_vc(double tol) {
    const VcBranch br;
    double lo = VcBranch::kLo, hi = VcBranch::kHi;
    double flo = br.a2(lo), fhi = br.a2(hi);
    if (!(flo > 0.0 && fhi < 0.0))
        throw SolveError(SolveError::Kind::NoValidScenario, "v_c: a2 does not change sign on [0.2, 0.4]");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = br.a2(mid);
        if (fm > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    (void)fhi;
    return 0.5 * (lo + hi);
}

}  // namespace gpem
