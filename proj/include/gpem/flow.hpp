#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "gpem/continuation.hpp"

namespace gpem {

class CollisionSingularity : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rates in the packed coordinates of solver.hpp.
Vec rate_t(Scenario s, const Vec& x, const FieldParams& p, const QuadSpec& q = {});
Vec rate_v(Scenario s, const Vec& x, const FieldParams& p, const QuadSpec& q = {});

// Derivatives of every root, laid out like the config itself (a RealPair holds
// (db1, db2), a ConjPair holds (dre, dim)).
SupportConfig rhs_t(const SupportConfig& cfg, const FieldParams& p, const QuadSpec& q = {});
SupportConfig rhs_v(const SupportConfig& cfg, const FieldParams& p, const QuadSpec& q = {});

// Numerator H of the v-derivative of sqrt(R): coefficients low to high.
std::vector<double> neutral_numerator(const SupportConfig& cfg, const FieldParams& p,
                                      const QuadSpec& q = {});
// Real zeros of H, ascending.
std::vector<double> neutral_zeros(const SupportConfig& cfg, const FieldParams& p,
                                  const QuadSpec& q = {});

struct FlowOptions {
    QuadSpec quad{};
    double ode_tol = 1e-7;
    double event_tol = 1e-10;
    int samples = 200;  // geometric output grid size
};

// Tracking options wired to rate_t / rate_v.
TrackOptions flow_track_options(Family::Param param, const FlowOptions& o);

Trajectory evolve_t(const FieldParams& p, double t_start, double t_end,
                    const FlowOptions& o = {});
Trajectory evolve_v(const FieldParams& p, double v_start, double v_end,
                    const FlowOptions& o = {});

std::vector<double> geometric_grid(double from, double to, int n);

}  // namespace gpem
