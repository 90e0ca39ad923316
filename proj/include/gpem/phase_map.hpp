#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gpem/flow.hpp"

namespace gpem {

struct PhaseCell {
    double beta = 0.0, gamma = 0.0;
    PhaseRegion region = PhaseRegion::A;
    std::vector<std::pair<EventKind, double>> times;
    std::vector<int> sequence;  // real-line cut counts in order of increasing t
    double t_final = 0.0;
    std::string error;          // empty on success
};

struct PhaseOptions {
    FlowOptions flow{};
    double t_start = 1e-3;
    double t_first = 16.0;  // first horizon; multiplied by 4 until the hard phase is terminal
    double t_cap = 1e6;
};

// Expected real-line sequence for a region ([] on boundaries).
std::vector<int> expected_sequence(PhaseRegion r);

PhaseCell phase_sequence(double beta, double gamma, const PhaseOptions& o = {});

// Inclusive grid lo..hi with n points.
struct Range {
    double lo, hi;
    int n;
    double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

// Cells in row-major order (beta fastest). jobs <= 0: OpenMP default.
std::vector<PhaseCell> phase_grid(const Range& beta, const Range& gamma, int jobs = 0,
                                  const PhaseOptions& o = {});
std::vector<PhaseCell> phase_grid_serial(const Range& beta, const Range& gamma,
                                         const PhaseOptions& o = {});

struct CurvePoint {
    std::string curve;
    double beta, gamma;
};
// Region boundaries sampled over [beta_lo, beta_hi]: the bisector beta + gamma = 0
// (beta > -1), the triple-root and type-III curves and phi(y+) = 0 (beta < -1).
std::vector<CurvePoint> boundary_curves(double beta_lo, double beta_hi, int n);

// Soft-edge endpoint a2 for the quartic-Penner problem with coupling v.
double vc_a2(double v);
double find_vc(double tol = 1e-7);

}  // namespace gpem
