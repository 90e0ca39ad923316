// Branch tracking in a one-parameter family of fields (mass t or pole position v),
// with event location and scenario switching.
#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "gpem/solver.hpp"

namespace gpem {

enum class EventKind {
    TypeIBirth,
    TypeIIMerge,
    TypeIIISoftCollision,
    OriginSoftToHard,
    TripleRootAtOrigin,
    ComplexPairCollision,
    ComplexPairFormation,
    GapOpening,  // reverse of a merge; appears in v-flows
    CutDeath     // reverse of a birth; appears in v-flows
};
std::string_view event_name(EventKind k);

struct TransitionEvent {
    EventKind kind;
    double time;      // t or v
    double location;  // x where it happens
    Scenario pre_scenario;
    Scenario post_scenario;
    SupportConfig pre;
    SupportConfig post;
};

struct Sample {
    double param;
    SupportConfig config;
};

struct Trajectory {
    std::string parameter;  // "t" or "v"
    std::vector<Sample> samples;
    std::vector<TransitionEvent> events;
};

// dx/dparam for the packed unknowns of a scenario.
using RateFn = std::function<Vec(Scenario, const Vec&, const FieldParams&)>;

struct Family {
    enum class Param { T, V } param = Param::T;
    double beta = 0.0, gamma = 1.0;
    double fixed = 1.0;  // v for a t-family, t for a v-family
    FieldParams at(double value) const;
    std::string_view name() const { return param == Param::T ? "t" : "v"; }
};

struct TrackOptions {
    SolverOptions solver{};
    RateFn rate;            // empty: secant predictor only
    double ode_tol = 1e-7;  // RK45 local error target (relative)
    double h0 = 0.02;       // initial step in log(param)
    double hmax = 0.1;
    double hmin = 1e-13;
    double event_tol = 1e-10;  // bracket width in param
    double gap_trigger = 2e-3;  // relative gap below which a merge is resolved
    double type_iii_tol = 1e-7;
    std::vector<double> grid;  // output grid in param (monotone in travel direction)
    bool record = true;
    long max_steps = 200000;
};

struct TrackResult {
    Trajectory trajectory;
    Scenario scenario;
    Vec x;
};

TrackResult track(const Family& fam, double from, Scenario sc, const Vec& x0, double to,
                  const TrackOptions& opt);

}  // namespace gpem
