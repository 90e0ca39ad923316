#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gpem/fekete.hpp"

using namespace gpem;

TEST_SUITE("fekete") {

TEST_CASE("parallel kernels equal the serial reference") {
    const FieldParams p{-4, 3, 2.59, 1};
    const std::vector<double> z0 = fekete_initial(64, p, 7);
    const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(z0.data(), 64);
    for (int threads : {1, 2, 4}) {
        CHECK(fekete_energy(z, p, threads) == doctest::Approx(fekete_energy_serial(z, p)).epsilon(1e-14));
        CHECK((fekete_gradient(z, p, threads) - fekete_gradient_serial(z, p)).norm() == 0.0);
        CHECK((fekete_hessian(z, p, threads) - fekete_hessian_serial(z, p)).norm() == 0.0);
    }
}

TEST_CASE("kernels are consistent derivatives") {
    const FieldParams p{0, 1, 1, 1};
    const std::vector<double> z0 = fekete_initial(16, p, 3);
    Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(z0.data(), 16);
    const Eigen::VectorXd g = fekete_gradient_serial(z, p);
    const Eigen::MatrixXd H = fekete_hessian_serial(z, p);
    const double h = 1e-6;
    for (int i : {0, 7, 15}) {
        Eigen::VectorXd zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        CHECK(g[i] == doctest::Approx((fekete_energy_serial(zp, p) - fekete_energy_serial(zm, p)) / (2 * h)).epsilon(1e-6));
        const Eigen::VectorXd dg = (fekete_gradient_serial(zp, p) - fekete_gradient_serial(zm, p)) / (2 * h);
        CHECK((H.col(i) - dg).norm() < 1e-5 * H.col(i).norm());
    }
}

TEST_CASE("nearly Gaussian field gives a symmetric configuration") {
    // gamma tiny: points sit symmetrically about the minimizer x = 5
    const FieldParams p{-5, 1e-9, 1, 1};
    const ParticleConfig c = minimize_energy(8, p);
    REQUIRE(c.points.size() == 8);
    for (int i = 0; i < 4; ++i) CHECK(c.points[i] + c.points[7 - i] == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(std::is_sorted(c.points.begin(), c.points.end()));
}

TEST_CASE("energy decreases monotonically and the minimum is stationary") {
    const FieldParams p{0, 1, 1, 1};
    const ParticleConfig c = minimize_energy(50, p, 11);
    CHECK(c.max_gradient < 1e-8);
    for (std::size_t i = 1; i < c.energy_history.size(); ++i) CHECK(c.energy_history[i] <= c.energy_history[i - 1]);
    CHECK(std::is_sorted(c.points.begin(), c.points.end()));
    CHECK(c.points.front() >= 0.0);
    // the hard edge at the origin is an active constraint
    CHECK(c.points.front() == 0.0);
}

TEST_CASE("largest particle approaches the soft edge like n^(-2/3)") {
    const FieldParams p{0, 1, 1, 1};
    const double a1 = support_right(solve_at(p).config);
    double prev = 1.0;
    for (int n : {25, 50, 100}) {
        const double gap = (a1 - minimize_energy(n, p).points.back()) / a1;
        CAPTURE(n);
        CHECK(gap > 0.0);
        CHECK(gap < prev);
        CHECK(gap * std::pow(n, 2.0 / 3.0) < 1.5);
        prev = gap;
    }
}

TEST_CASE("occupancy of the first cut follows the continuum mass") {
    const FieldParams p{-4, 3, 2.59, 1};
    const SolveReport r = solve_at(p);
    REQUIRE(scenario_of(r.config) == Scenario::TwoCut);
    const auto c = std::get<TwoCut>(r.config);
    const int n = 100;
    const ParticleConfig pc = minimize_energy(n, p);
    const double frac = static_cast<double>(std::count_if(pc.points.begin(), pc.points.end(),
                                                          [&](double x) { return x <= c.a1; })) / n;
    CHECK(std::abs(frac - partial_mass(r.config, p, c.a1) / p.t) < 0.05);
    CHECK(count_in(pc.points, c.a1, c.a2) == 0);
}

TEST_CASE("argument checks") {
    CHECK_THROWS_AS(minimize_energy(4, {0, 1, 1, 1}), InvalidArgument);
    CHECK_THROWS_AS(minimize_energy(10, {0, 0, 1, 1}), InvalidArgument);
}

}
