#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gpem/flow.hpp"

using namespace gpem;

namespace {

// central difference of Newton re-solves against the analytic rate
double rate_error(const FieldParams& p, bool in_v) {
    const SolveReport r = solve_at(p);
    const Scenario s = scenario_of(r.config);
    const Vec x = pack(r.config);
    const double h = 1e-5 * (in_v ? p.v : p.t);
    FieldParams pp = p, pm = p;
    (in_v ? pp.v : pp.t) += h;
    (in_v ? pm.v : pm.t) -= h;
    const Vec fd = (newton(s, x, pp).x - newton(s, x, pm).x) / (2 * h);
    const Vec an = in_v ? rate_v(s, x, p) : rate_t(s, x, p);
    return (fd - an).norm() / (1.0 + an.norm());
}

}  // namespace

TEST_SUITE("flow") {

TEST_CASE("analytic rates match re-solve differences") {
    const FieldParams pts[] = {{-4, 3, 2.5, 1}, {-4, 3, 3, 1},   {-4, 3, 50, 1},
                               {0, -1, 1, 1},   {0, -5, 1, 1},   {2, 3, 1, 0.7}};
    for (const auto& p : pts) {
        CAPTURE(p.beta);
        CAPTURE(p.t);
        CHECK(rate_error(p, false) < 1e-7);
        CHECK(rate_error(p, true) < 1e-7);
    }
    // two-cut rates involve a Robin centroid; differences are truncation-limited
    CHECK(rate_error({-4, 3, 2.59, 1}, false) < 1e-4);
    CHECK(rate_error({-4, 3, 2.59, 1}, true) < 1e-4);
}

TEST_CASE("rate signs as v decreases") {
    {
        const SolveReport r = solve_at({0, -1, 1, 0.2});
        REQUIRE(scenario_of(r.config) == Scenario::OneCutSoft);
        const auto d = std::get<OneCutSoft>(rhs_v(r.config, {0, -1, 1, 0.2}));
        CHECK(d.a2 < 0);
        CHECK(d.a3 < 0);
        // b1 climbs towards the v -> 0 limit -1.2444 from below, so db1/dv < 0 here
        CHECK(d.b1 < 0);
    }
    {
        const SolveReport r = solve_at({2, 3, 1, 0.7});
        REQUIRE(scenario_of(r.config) == Scenario::OneCutHard);
        CHECK(std::get<OneCutHard>(rhs_v(r.config, {2, 3, 1, 0.7})).a1 > 0);
    }
    {
        const FieldParams p{-3, 1, 3, 0.01};
        const SolveReport r = solve_at(p);
        REQUIRE(scenario_of(r.config) == Scenario::TwoCut);
        CHECK(std::get<TwoCut>(rhs_v(r.config, p)).a3 > 0);
        // the lower zero of the neutral numerator stays left of the first cut end and 3v
        const auto z = neutral_zeros(r.config, p);
        REQUIRE_FALSE(z.empty());
        CHECK(z.front() < std::min(std::get<TwoCut>(r.config).a1, 3 * p.v));
    }
}

TEST_CASE("root-shaped derivatives of a conjugate pair") {
    const FieldParams p{0, 1, 1, 1};
    const SolveReport r = solve_at(p);
    const auto d = std::get<OneCutHard>(rhs_t(r.config, p));
    REQUIRE(std::holds_alternative<ConjPair>(d.b));
    const double h = 1e-5;
    const auto up = std::get<OneCutHard>(solve_at({0, 1, 1 + h, 1}).config);
    const auto dn = std::get<OneCutHard>(solve_at({0, 1, 1 - h, 1}).config);
    CHECK(std::get<ConjPair>(d.b).im ==
          doctest::Approx((std::get<ConjPair>(up.b).im - std::get<ConjPair>(dn.b).im) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("collisions are reported") {
    const FieldParams p{-4, 3, 2.5, 1};
    CHECK_THROWS_AS(rate_t(Scenario::OneCutSoft, Vec{{0.5, 0.5, 5.0}}, p), CollisionSingularity);
}

TEST_CASE("mass flow through the birth and merge") {
    FlowOptions o;
    o.samples = 40;
    const Trajectory tr = evolve_t({-4, 3, 1, 1}, 0.01, 3.0, o);
    REQUIRE(tr.events.size() == 2);
    CHECK(tr.events[0].kind == EventKind::TypeIBirth);
    CHECK(tr.events[0].time == doctest::Approx(2.5863530030853).epsilon(1e-9));
    CHECK(tr.events[1].kind == EventKind::TypeIIMerge);
    CHECK(tr.events[1].time == doctest::Approx(2.6071073209684).epsilon(1e-9));
    CHECK(tr.events[1].location == doctest::Approx(0.0768697919681).epsilon(1e-6));
    CHECK(tr.events[1].pre_scenario == Scenario::TwoCut);
    CHECK(tr.events[1].post_scenario == Scenario::OneCutHard);
    // samples are monotone and the scenario only changes at events (event samples
    // themselves may carry either side)
    auto at_event = [&](double u) {
        return std::any_of(tr.events.begin(), tr.events.end(), [&](const TransitionEvent& e) {
            return std::abs(e.time - u) < 1e-6 * u;
        });
    };
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
        const double lo = tr.samples[i - 1].param, hi = tr.samples[i].param;
        CHECK(hi > lo);
        const bool between = std::any_of(tr.events.begin(), tr.events.end(), [&](const TransitionEvent& e) {
            return e.time >= lo - 1e-6 * lo && e.time <= hi + 1e-6 * hi;
        });
        if (!between && !at_event(lo) && !at_event(hi))
            CHECK(scenario_of(tr.samples[i].config) == scenario_of(tr.samples[i - 1].config));
    }
    // re-solving just around the merge gives the two sides
    CHECK(scenario_of(solve_at({-4, 3, tr.events[1].time - 1e-6, 1}).config) == Scenario::TwoCut);
    CHECK(scenario_of(solve_at({-4, 3, tr.events[1].time + 1e-6, 1}).config) == Scenario::OneCutHard);
}

TEST_CASE("hard-edge trace is conserved along the t-flow") {
    FlowOptions o;
    o.samples = 30;
    const double beta = 0.0, v = 1.0;
    const Trajectory tr = evolve_t({beta, 1, 1, v}, 0.05, 100.0, o);
    // the only event is the conjugate pair turning real on the negative axis
    REQUIRE(tr.events.size() == 1);
    CHECK(tr.events[0].kind == EventKind::ComplexPairCollision);
    CHECK(tr.events[0].location < -1.0);
    for (const Sample& s : tr.samples) {
        const auto& h = std::get<OneCutHard>(s.config);
        const auto [sum, prod] = sum_product(h.b);
        CHECK(std::abs(h.a1 + 2 * sum + 2 * v + 2 * beta) < 1e-9 * (1 + h.a1));
        (void)prod;
    }
}

TEST_CASE("triple root at the origin") {
    FlowOptions o;
    o.samples = 10;
    const Trajectory tr = evolve_t({-5, 3, 1, 1}, 1.0, 10.0, o);
    const auto it = std::find_if(tr.events.begin(), tr.events.end(),
                                 [](const TransitionEvent& e) { return e.kind == EventKind::TripleRootAtOrigin; });
    REQUIRE(it != tr.events.end());
    CHECK(it->time == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("pole flow to the atom limit") {
    FlowOptions o;
    o.samples = 20;
    const Trajectory tr = evolve_v({2, 3, 1, 1}, 1.0, 1e-6, o);
    const auto& last = std::get<OneCutHard>(tr.samples.back().config);
    CHECK(last.a1 < 1e-4);
}

TEST_CASE("argument checks") {
    CHECK_THROWS_AS(evolve_t({0, 1, 1, 1}, 2.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(evolve_v({0, 1, 1, 1}, 0.5, 1.0), InvalidArgument);
    const auto g = geometric_grid(0.01, 100, 5);
    CHECK(g.front() == 0.01);
    CHECK(g.back() == 100);
    CHECK(g[2] == doctest::Approx(1.0));
}

}
