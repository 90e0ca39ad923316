#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "gpem/solver.hpp"

namespace gpem {

// Weighted discrete energy  sum_{i<j} -log|z_i - z_j| + (n/t) sum_i phi(z_i)
// (n particles represent mass t). Kernels come in a serial reference form and an
// OpenMP form; both floor pair distances at kMinSeparation.
constexpr double kMinSeparation = 1e-14;

double fekete_energy_serial(const Eigen::VectorXd& z, const FieldParams& p);
Eigen::VectorXd fekete_gradient_serial(const Eigen::VectorXd& z, const FieldParams& p);
Eigen::MatrixXd fekete_hessian_serial(const Eigen::VectorXd& z, const FieldParams& p);

double fekete_energy(const Eigen::VectorXd& z, const FieldParams& p, int threads = 0);
Eigen::VectorXd fekete_gradient(const Eigen::VectorXd& z, const FieldParams& p, int threads = 0);
Eigen::MatrixXd fekete_hessian(const Eigen::VectorXd& z, const FieldParams& p, int threads = 0);

struct ParticleConfig {
    std::vector<double> points;  // sorted, >= 0
    double energy = 0.0;
    double max_gradient = 0.0;   // projected
    int iterations = 0;
    std::vector<double> energy_history;
};

struct FeketeOptions {
    int max_iter = 500;
    int sweeps = 5;          // coordinate Newton warm-up sweeps
    double grad_tol = 1e-8;
    int threads = 1;         // kernel threads; runs are single-threaded by default
};

// Quantiles of the continuum measure when the solver succeeds, else uniform on
// [0, y+ + 2]; the seed jitters the start by a small deterministic amount.
std::vector<double> fekete_initial(int n, const FieldParams& p, std::uint64_t seed);
ParticleConfig minimize_energy(int n, const FieldParams& p, std::uint64_t seed = 0,
                               const FeketeOptions& o = {});

// sup |F_n - F| against the normalized continuum CDF.
double ks_distance(const std::vector<double>& points, const SupportConfig& cfg,
                   const FieldParams& p);
int count_in(const std::vector<double>& points, double lo, double hi);

}  // namespace gpem
