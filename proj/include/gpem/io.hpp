// Plot-ready serialization: CSV tables with a one-line header and JSON documents.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>
#include "gpem/continuation.hpp"
#include "gpem/phase_map.hpp"

namespace gpem {

// 17 significant digits, '.' decimal, locale independent.
std::string fmt(double x);

struct ConfigChecks {
    double mass_error;  // |mass - t| / max(1, t)
    double w_spread;    // max |W| over interior support samples
};
ConfigChecks config_checks(const SupportConfig& cfg, const FieldParams& p, const QuadSpec& q = {});

nlohmann::ordered_json config_json(const SupportConfig& cfg);
nlohmann::ordered_json solve_json(const SolveReport& r, const FieldParams& p, const QuadSpec& q = {});

void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const Family& fam,
                          const QuadSpec& q = {});
nlohmann::ordered_json events_json(const Trajectory& tr);

void write_phase_csv(std::ostream& os, const std::vector<PhaseCell>& cells);
void write_boundary_csv(std::ostream& os, const std::vector<CurvePoint>& pts);

// x, density on an even grid over [lo, hi].
void write_density_csv(std::ostream& os, const SupportConfig& cfg, const FieldParams& p,
                       double lo, double hi, int n);
void write_realline_density_csv(std::ostream& os, const SupportConfig& cfg, const FieldParams& p,
                                double lo, double hi, int n);

std::string join_sequence(const std::vector<int>& s);

}  // namespace gpem
