#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gpem/phase_map.hpp"

using namespace gpem;

TEST_SUITE("phase_map") {

TEST_CASE("sequences per region") {
    struct Case {
        double b, g;
        std::vector<int> seq;
    };
    for (const Case& c : {Case{0, 1, {1}}, Case{0, -5, {2, 1}}, Case{-4, 3, {2, 3, 1}},
                          Case{-6, 12, {1, 3, 1}}, Case{-3, 4, {1, 3, 1}}, Case{-6, -6, {2, 1}}}) {
        CAPTURE(c.b);
        CAPTURE(c.g);
        const PhaseCell cell = phase_sequence(c.b, c.g);
        CHECK(cell.error.empty());
        CHECK(cell.sequence == c.seq);
        CHECK(cell.sequence == expected_sequence(cell.region));
    }
}

TEST_CASE("soft-to-hard time in region B") {
    // beta = 0, gamma = -5: the soft edge reaches the origin where a2 = 0 solves the
    // soft-edge system (reference from an independent high-precision root solve)
    const PhaseCell cell = phase_sequence(0, -5);
    REQUIRE(cell.times.size() == 1);
    CHECK(cell.times[0].first == EventKind::OriginSoftToHard);
    CHECK(cell.times[0].second == doctest::Approx(4.1997840755272).epsilon(1e-9));
}

TEST_CASE("gamma = 0 cells are excluded") {
    const PhaseCell cell = phase_sequence(-2, 0);
    CHECK(cell.sequence.empty());
    CHECK_FALSE(cell.error.empty());
}

TEST_CASE("parallel grid equals the serial reference") {
    const Range b{-6, 2, 3}, g{-2, 10, 3};
    const auto par = phase_grid(b, g, 2);
    const auto ser = phase_grid_serial(b, g);
    REQUIRE(par.size() == 9);
    REQUIRE(ser.size() == 9);
    for (std::size_t i = 0; i < par.size(); ++i) {
        CHECK(par[i].beta == ser[i].beta);
        CHECK(par[i].gamma == ser[i].gamma);
        CHECK(par[i].sequence == ser[i].sequence);
        REQUIRE(par[i].times.size() == ser[i].times.size());
        for (std::size_t k = 0; k < par[i].times.size(); ++k) CHECK(par[i].times[k].second == ser[i].times[k].second);
    }
    CHECK(par[0].beta == -6);
    CHECK(par[1].beta == -2);
    CHECK(par[3].gamma == 4);
}

TEST_CASE("range endpoints are inclusive") {
    const Range r{-6, 2, 9};
    CHECK(r.at(0) == -6);
    CHECK(r.at(8) == 2);
    CHECK(r.at(4) == -2);
    CHECK(Range{1, 5, 1}.at(0) == 1);
}

TEST_CASE("boundary curves") {
    const auto pts = boundary_curves(-8, 2, 11);
    auto find = [&](const std::string& name, double b) {
        const auto it = std::find_if(pts.begin(), pts.end(),
                                     [&](const CurvePoint& c) { return c.curve == name && c.beta == b; });
        REQUIRE(it != pts.end());
        return it->gamma;
    };
    CHECK(find("bisector", 0) == 0.0);
    CHECK_FALSE(std::signbit(find("bisector", 0)));
    CHECK(find("bisector", 2) == -2);
    CHECK(find("triple_root", -5) == doctest::Approx(3.0));
    CHECK(find("type_iii", -6) == doctest::Approx(std::pow(3.0, 2.5)));
    // the phi(y+) = 0 curve lies between the other two and is where the C split changes
    const double g = find("phi_zero", -6);
    CHECK(g > find("triple_root", -6));
    CHECK(g < find("type_iii", -6));
    CHECK(classify_region(-6, g - 1e-6) == PhaseRegion::Cminus);
    CHECK(classify_region(-6, g + 1e-6) == PhaseRegion::Cplus);
}

TEST_CASE("critical coupling") {
    CHECK(vc_a2(0.2) > 0);
    CHECK(vc_a2(0.4) < 0);
    CHECK(find_vc(1e-9) == doctest::Approx(0.26959330188).epsilon(1e-8));
}

}
