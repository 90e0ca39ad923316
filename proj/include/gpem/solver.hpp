#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

#include "gpem/model.hpp"
#include "gpem/quadrature.hpp"

namespace gpem {

using Vec = Eigen::VectorXd;

class SolveError : public std::runtime_error {
public:
    enum class Kind { MaxIterations, SingularJacobian, DomainExit, NoValidScenario, Stall };
    SolveError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
    Kind kind;
};

// Unknown vectors:
//   OneCutHard  [a1, s, q]        s = b1 + b2, q = b1*b2 (real pair or conjugate pair alike)
//   OneCutSoft  [b1, a2, a3]
//   TwoCut      [a1, b1, a2, a3]
struct ResidualSystem {
    Scenario scenario;
    int dim;
    static ResidualSystem of(Scenario s);
};

Vec pack(const SupportConfig& cfg);
SupportConfig unpack(Scenario s, const Vec& x);
bool in_domain(Scenario s, const Vec& x, double v);

// Raw residuals: [trace, 1/z moment, residue at -v, (gap centroid)].
Vec residuals(Scenario s, const Vec& x, const FieldParams& p, const QuadSpec& q = {});
// Same construction for an explicit pole position; identical to residuals().
Vec residuals_v(Scenario s, const Vec& x, const FieldParams& p, const QuadSpec& q = {});
// Residuals divided by their natural size, used for convergence tests.
Vec scaled_residuals(Scenario s, const Vec& x, const FieldParams& p, const QuadSpec& q = {});

// Coefficients g1, g2 of sqrt(R(z))/z = 1 + g1/z + g2/z^2 + ... and the residue of
// sqrt(R) at z = -v, built by multiplying truncated series.
struct Expansion {
    double g1, g2, residue;
};
Expansion expand(Scenario s, const Vec& x, double v);

struct Validity {
    bool ordering = false;
    bool density_nonnegative = false;
    bool inequalities = false;
    std::string reason;
    bool ok() const { return ordering && density_nonnegative && inequalities; }
};
Validity check_validity(const SupportConfig& cfg, const FieldParams& p, const QuadSpec& q = {});

struct SolverOptions {
    QuadSpec quad{};
    int max_iter = 100;
    double tol = 1e-10;
};

struct SolveReport {
    SupportConfig config;
    double residual_norm = 0.0;
    int iterations = 0;
    Validity validity;
};

struct NewtonResult {
    Vec x;
    double residual_norm;
    int iterations;
};
NewtonResult newton(Scenario s, const Vec& guess, const FieldParams& p,
                    const SolverOptions& o = {});
SolveReport newton_solve(const ResidualSystem& sys, const Vec& guess, const FieldParams& p,
                         const SolverOptions& o = {});

SolveReport solve_at(const FieldParams& p, std::optional<SupportConfig> hint = std::nullopt,
                     const SolverOptions& o = {});

}  // namespace gpem
