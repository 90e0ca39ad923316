// One line per acceptance criterion: "criterion N: PASS|FAIL  <detail>".
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gpem/fekete.hpp"
#include "gpem/flow.hpp"
#include "gpem/io.hpp"
#include "gpem/phase_map.hpp"

using namespace gpem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool ok = true;
    std::string detail;
    void require(bool c, const std::string& what) {
        if (!c) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

bool near(double x, double ref, double tol) { return std::abs(x - ref) <= tol; }

std::string num(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6g", x);
    return b;
}

int failures = 0;

void report(int n, const std::function<Verdict()>& body) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v.ok = false;
        v.detail = std::string("exception: ") + e.what();
    }
    const double s = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!v.ok) ++failures;
    std::printf("criterion %d: %s  [%.1fs] %s\n", n, v.ok ? "PASS" : "FAIL", s, v.detail.c_str());
    std::fflush(stdout);
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const TransitionEvent* first_of(const Trajectory& tr, EventKind k) {
    for (const auto& e : tr.events)
        if (e.kind == k) return &e;
    return nullptr;
}

// Trajectories shared by criteria 1, 3, 4 and 7.
struct Track {
    std::string name;
    Family fam;
    Trajectory tr;
};
std::vector<Track> tracks;

}  // namespace

int main() {
    FlowOptions fo;

    report(1, [&] {
        Verdict v;
        const auto t0 = Clock::now();
        const SolveReport r = solve_at({-4, 3, 2.5, 1});
        const auto* s = std::get_if<OneCutSoft>(&r.config);
        v.require(s != nullptr, "t = 2.5 not soft-edged");
        if (s) {
            v.require(near(s->b1, 0, 1e-6), "b1 = " + num(s->b1));
            v.require(near(s->a2, 3 - std::sqrt(7.0), 1e-9), "a2 off");
            v.require(near(s->a3, 3 + std::sqrt(7.0), 1e-9), "a3 off");
        }
        const Trajectory tr = evolve_t({-4, 3, 1, 1}, 0.01, 50.0, fo);
        tracks.push_back({"t-flow(-4,3)", Family{Family::Param::T, -4, 3, 1}, tr});
        const auto* e1 = first_of(tr, EventKind::TypeIBirth);
        const auto* e2 = first_of(tr, EventKind::TypeIIMerge);
        const auto* e3 = first_of(tr, EventKind::ComplexPairCollision);
        v.require(e1 && e2 && e3, "missing event");
        if (e1 && e2 && e3) {
            v.require(near(e1->time, 2.58, 0.01), "TypeI t = " + num(e1->time));
            const auto& pre = std::get<OneCutSoft>(e1->pre);
            v.require(near(pre.b1, 0.07, 0.01) && near(pre.a2, 0.17, 0.01) && near(pre.a3, 5.68, 0.01),
                      "TypeI config off");
            v.require(near(e2->time, 2.60, 0.01), "TypeII t = " + num(e2->time));
            v.require(near(e2->location, 0.07, 0.01), "TypeII x = " + num(e2->location));
            v.require(near(e3->time, 43.94, 0.05), "collision t = " + num(e3->time));
            v.require(near(e3->location, -1.89, 0.01), "collision x = " + num(e3->location));
            v.note("TypeI " + num(e1->time) + ", TypeII " + num(e2->time) + " at " + num(e2->location) +
                   ", collision " + num(e3->time) + " at " + num(e3->location));
        }
        const double s_run = elapsed(t0);
        v.require(s_run < 30, "runtime " + num(s_run) + "s");
        return v;
    });

    report(2, [&] {
        Verdict v;
        const auto t0 = Clock::now();
        const double vc = find_vc(1e-9);
        v.require(near(vc, 0.269593, 1e-5), "v_c = " + num(vc));
        v.require(elapsed(t0) < 10, "too slow");
        v.note("v_c = " + fmt(vc));
        return v;
    });

    report(3, [&] {
        Verdict v;
        const FieldParams p{0, -1, 1, 1};
        const Trajectory tr = evolve_v(p, 1.0, 1e-6, fo);
        tracks.push_back({"v-flow(0,-1,1)", Family{Family::Param::V, 0, -1, 1}, tr});
        const auto* s = std::get_if<OneCutSoft>(&tr.samples.back().config);
        v.require(s != nullptr, "terminal config not soft-edged");
        if (s) {
            v.require(near(s->b1, -1.2444, 1e-3) && near(s->a2, 0.294, 1e-3) && near(s->a3, 2.1946, 1e-3),
                      "terminal config off");
            v.note("terminal (" + num(s->b1) + ", " + num(s->a2) + ", " + num(s->a3) + ")");
        }
        // 3y^4 - 4y^2 - 1 = 0 gives the limit in closed form
        const double y = -std::sqrt((2 + std::sqrt(7.0)) / 3), h = std::sqrt(4 - 2 * y * y);
        const QuarticLimit q = quartic_b1_recipe(p);
        v.require(near(q.b1, y, 1e-9) && near(q.a2, -y - h, 1e-9) && near(q.a3, -y + h, 1e-9),
                  "quartic recipe off");
        return v;
    });

    report(4, [&] {
        Verdict v;
        {
            const Trajectory tr = evolve_t({-5, 3, 1, 1}, 0.1, 10.0, fo);
            tracks.push_back({"t-flow(-5,3)", Family{Family::Param::T, -5, 3, 1}, tr});
            const auto* e = first_of(tr, EventKind::TripleRootAtOrigin);
            v.require(e && near(e->time, 6.0, 1e-3), "triple root event");
            if (e) v.note("triple root t = " + num(e->time));
        }
        for (double b : {-3.0, -6.0, -11.0}) {
            const double g = std::pow((3 - 2 * b) / 5, 2.5);
            const Trajectory tr = evolve_t({b, g, 1, 1}, 0.01, 40.0, fo);
            const auto* e = first_of(tr, EventKind::TypeIIISoftCollision);
            const double want = -2 * (b + 1) / 5;
            v.require(e && near(e->location, want, 1e-4), "TypeIII at beta = " + num(b));
            if (e) v.note("TypeIII(" + num(b) + ") x = " + num(e->location));
        }
        return v;
    });

    report(5, [&] {
        // For gamma > 0 the pole-residue identity forces the nearer root below -1, so the
        // check uses b2 < -1, b1 < 0 and b2 < b1 with both trends.
        Verdict v;
        for (auto [b, g] : {std::pair{-4.0, 3.0}, {0.0, 1.0}, {0.0, -5.0}}) {
            double prev_dist = INFINITY, prev_b2 = INFINITY;
            std::string row = "(" + num(b) + "," + num(g) + "): b1";
            for (double t : {1e3, 1e4, 1e5}) {
                const SolveReport r = solve_at({b, g, t, 1});
                const auto* h = std::get_if<OneCutHard>(&r.config);
                const auto* rp = h ? std::get_if<RealPair>(&h->b) : nullptr;
                if (!rp) {
                    v.require(false, "not hard-edged with real b-roots at t = " + num(t));
                    break;
                }
                if (t == 1e3) v.require(rp->b2 < -1 && rp->b1 < 0 && rp->b2 < rp->b1, "ordering at t = 1e3");
                const double dist = std::abs(rp->b1 + 1);
                v.require(dist < prev_dist, "|b1 + 1| not decreasing");
                v.require(rp->b2 < prev_b2, "b2 not decreasing");
                prev_dist = dist;
                prev_b2 = rp->b2;
                row += " " + num(rp->b1);
            }
            v.note(row);
        }
        return v;
    });

    report(6, [&] {
        Verdict v;
        std::mt19937_64 rng(20240611);
        std::uniform_real_distribution<double> ub(-10, 4), ug(-8, 15), ulogt(std::log(0.05), std::log(60.0));
        const PhaseRegion regions[] = {PhaseRegion::A, PhaseRegion::B, PhaseRegion::Cplus, PhaseRegion::Cminus};
        int accepted = 0, unsolved = 0, bad = 0, two_cut = 0;
        std::string first_bad;
        for (PhaseRegion want : regions) {
            for (int k = 0; k < 50;) {
                const double b = ub(rng), g = ug(rng), t = std::exp(ulogt(rng));
                if (g == 0.0 || classify_region(b, g) != want) continue;
                ++k;
                const FieldParams p{b, g, t, 1};
                SolveReport r;
                try {
                    r = solve_at(p);
                } catch (const SolveError&) {
                    ++unsolved;
                    if (first_bad.empty()) first_bad = "unsolved (" + num(b) + "," + num(g) + "," + num(t) + ")";
                    continue;
                }
                ++accepted;
                const Scenario sc = scenario_of(r.config);
                const Vec x = pack(r.config);
                const Vec res = residuals(sc, x, p);
                const ConfigChecks ck = config_checks(r.config, p);
                bool ok = ck.mass_error * std::max(1.0, t) <= 1e-8 * std::max(1.0, t);
                ok = ok && std::abs(res[2]) <= 1e-10 * std::abs(g);
                ok = ok && std::abs(res[0]) <= 1e-12 * std::max(1.0, support_right(r.config));
                ok = ok && ck.w_spread <= 1e-6;
                const DensityForm f = density_form(r.config, 1.0);
                for (const Interval& iv : support(r.config))
                    for (int i = 1; i < 200; ++i) ok = ok && f.density(iv.lo + (iv.hi - iv.lo) * i / 200) >= -1e-12;
                if (const auto* tc = std::get_if<TwoCut>(&r.config)) {
                    ++two_cut;
                    ok = ok && std::abs(gap_condition(*tc, p)) <= 1e-9;
                }
                if (!ok) {
                    ++bad;
                    if (first_bad.empty()) first_bad = "property failure at (" + num(b) + "," + num(g) + "," + num(t) + ")";
                }
            }
        }
        v.require(bad == 0, std::to_string(bad) + " configs violate a property");
        v.require(unsolved == 0, std::to_string(unsolved) + " draws unsolved");
        v.note(std::to_string(accepted) + "/200 accepted, " + std::to_string(two_cut) + " two-cut");
        if (!first_bad.empty()) v.note(first_bad);
        return v;
    });

    report(7, [&] {
        Verdict v;
        double worst = 0, worst_ratio = INFINITY;
        int checked = 0, fd_checked = 0;
        for (const Track& tk : tracks) {
            const auto& S = tk.tr.samples;
            // interior checkpoints kept away from events (conditioning degrades there)
            std::vector<const Sample*> pool;
            for (const Sample& s : S) {
                bool clear = s.param != S.front().param && s.param != S.back().param;
                for (const auto& e : tk.tr.events) clear = clear && std::abs(std::log(s.param / e.time)) > 0.05;
                if (clear) pool.push_back(&s);
            }
            const int m = std::min<int>(20, pool.size());
            for (int i = 0; i < m; ++i) {
                const Sample& s = *pool[(pool.size() - 1) * i / std::max(1, m - 1)];
                const FieldParams p = tk.fam.at(s.param);
                const SolveReport r = solve_at(p);
                const Scenario sc = scenario_of(s.config);
                if (scenario_of(r.config) != sc) {
                    v.require(false, tk.name + ": scenario differs at " + num(s.param));
                    continue;
                }
                const Vec a = pack(s.config), b = pack(r.config);
                for (int k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]) / (1 + std::abs(b[k])));
                ++checked;
                if (i % 4 != 0) continue;
                // central differences of re-solves against the rate, under step halving
                const bool in_v = tk.fam.param == Family::Param::V;
                const Vec rate = in_v ? rate_v(sc, b, p) : rate_t(sc, b, p);
                auto fd_err = [&](double h) {
                    const Vec xp = newton(sc, b, tk.fam.at(s.param + h)).x;
                    const Vec xm = newton(sc, b, tk.fam.at(s.param - h)).x;
                    return ((xp - xm) / (2 * h) - rate).norm();
                };
                const double h = 2e-2 * s.param;
                const double e1 = fd_err(h), e2 = fd_err(h / 2);
                if (e2 > 1e-8 * (1 + rate.norm())) worst_ratio = std::min(worst_ratio, e1 / e2);
                ++fd_checked;
            }
        }
        v.require(checked >= 20 * static_cast<int>(tracks.size()) - 5, "too few checkpoints");
        v.require(worst < 1e-7, "flow vs solve " + num(worst));
        v.require(worst_ratio > 3.0, "FD halving ratio " + num(worst_ratio));
        v.note(std::to_string(checked) + " checkpoints on " + std::to_string(tracks.size()) +
               " trajectories, max dev " + num(worst) + "; " + std::to_string(fd_checked) +
               " FD checks, min halving ratio " + (std::isinf(worst_ratio) ? "n/a (roundoff)" : num(worst_ratio)));
        return v;
    });

    report(8, [&] {
        Verdict v;
        const auto t0 = Clock::now();
        const auto cells = phase_grid(Range{-8, 2, 6}, Range{-2, 13, 6}, 4);
        int compared = 0, matched = 0;
        bool seen[4] = {};
        const std::vector<std::vector<int>> pats = {{1}, {2, 1}, {1, 3, 1}, {2, 3, 1}};
        for (const PhaseCell& c : cells) {
            const auto exp = expected_sequence(c.region);
            if (exp.empty()) continue;
            ++compared;
            if (c.sequence == exp) ++matched;
            else v.require(false, "(" + num(c.beta) + "," + num(c.gamma) + ") " + join_sequence(c.sequence) +
                                      " vs " + join_sequence(exp) + (c.error.empty() ? "" : " " + c.error));
            for (int k = 0; k < 4; ++k) seen[k] = seen[k] || c.sequence == pats[k];
        }
        for (int k = 0; k < 4; ++k) v.require(seen[k], "pattern " + join_sequence(pats[k]) + " absent");
        v.require(elapsed(t0) < 300, "too slow");
        v.note(std::to_string(matched) + "/" + std::to_string(compared) + " non-boundary cells match");
        return v;
    });

    report(9, [&] {
        Verdict v;
        const int n = 100;
        for (const FieldParams& p : {FieldParams{0, 1, 1, 1}, FieldParams{-4, 3, 2.59, 1}}) {
            const ParticleConfig pc = minimize_energy(n, p);
            const SolveReport r = solve_at(p);
            const double ks = ks_distance(pc.points, r.config, p);
            v.require(ks < 3 / std::sqrt(double(n)), "KS " + num(ks));
            if (const auto* t = std::get_if<TwoCut>(&r.config)) {
                const int inside = count_in(pc.points, t->a1, t->a2);
                v.require(inside == 0, std::to_string(inside) + " particles in the gap");
            }
            v.note("(" + num(p.beta) + "," + num(p.gamma) + "," + num(p.t) + ") KS " + num(ks));
        }
        return v;
    });

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
