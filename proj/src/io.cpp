#include "gpem/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace gpem {

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) x = 0.0;  // no "-0"
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

ConfigChecks config_checks(const SupportConfig& cfg, const FieldParams& p, const QuadSpec& q) {
    ConfigChecks c{};
    c.mass_error = std::abs(mass_integral(cfg, p, q) - p.t) / std::max(1.0, p.t);
    double lo = INFINITY, hi = -INFINITY;
    for (const Interval& iv : support(cfg)) {
        const int m = 9;
        for (int k = 1; k <= m; ++k) {
            const double x = iv.lo + (iv.hi - iv.lo) * k / (m + 1);
            const double w = potential_W(cfg, p, x);
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
    }
    c.w_spread = hi - lo;
    return c;
}

namespace {

struct Row {
    double a1 = NAN, b1r = NAN, b1i = NAN, b2r = NAN, b2i = NAN, a2 = NAN, a3 = NAN;
};

Row row_of(const SupportConfig& cfg) {
    Row r;
    if (const auto* h = std::get_if<OneCutHard>(&cfg)) {
        r.a1 = h->a1;
        if (const auto* rp = std::get_if<RealPair>(&h->b)) {
            r.b1r = rp->b1, r.b1i = 0.0, r.b2r = rp->b2, r.b2i = 0.0;
        } else {
            const auto& z = std::get<ConjPair>(h->b);
            r.b1r = z.re, r.b1i = z.im, r.b2r = z.re, r.b2i = -z.im;
        }
    } else if (const auto* s = std::get_if<OneCutSoft>(&cfg)) {
        r.b1r = s->b1, r.b1i = 0.0, r.a2 = s->a2, r.a3 = s->a3;
    } else {
        const auto& t = std::get<TwoCut>(cfg);
        r.a1 = t.a1, r.b1r = t.b1, r.b1i = 0.0, r.a2 = t.a2, r.a3 = t.a3;
    }
    return r;
}

// empty cell for a root the scenario does not have
std::string cell(double x) { return std::isnan(x) ? std::string() : fmt(x); }

}  // namespace

nlohmann::ordered_json config_json(const SupportConfig& cfg) {
    nlohmann::ordered_json j;
    j["scenario"] = scenario_name(scenario_of(cfg));
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, OneCutHard>) {
                j["a1"] = c.a1;
                if (const auto* rp = std::get_if<RealPair>(&c.b)) {
                    j["b1"] = rp->b1;
                    j["b2"] = rp->b2;
                } else {
                    const auto& z = std::get<ConjPair>(c.b);
                    j["b1"] = {{"re", z.re}, {"im", z.im}};
                    j["b2"] = {{"re", z.re}, {"im", -z.im}};
                }
            } else if constexpr (std::is_same_v<T, OneCutSoft>) {
                j["b1"] = c.b1;
                j["a2"] = c.a2;
                j["a3"] = c.a3;
            } else {
                j["a1"] = c.a1;
                j["b1"] = c.b1;
                j["a2"] = c.a2;
                j["a3"] = c.a3;
            }
        },
        cfg);
    nlohmann::ordered_json sup = nlohmann::ordered_json::array();
    for (const Interval& iv : support(cfg)) sup.push_back({iv.lo, iv.hi});
    j["support"] = sup;
    return j;
}

nlohmann::ordered_json solve_json(const SolveReport& r, const FieldParams& p, const QuadSpec& q) {
    nlohmann::ordered_json j;
    j["params"] = {{"beta", p.beta}, {"gamma", p.gamma}, {"t", p.t}, {"v", p.v}};
    j["region"] = region_name(classify_region(p.beta, p.gamma));
    const auto c = config_json(r.config);
    for (auto it = c.begin(); it != c.end(); ++it) j[it.key()] = it.value();
    const ConfigChecks ck = config_checks(r.config, p, q);
    j["residual_norm"] = r.residual_norm;
    j["mass_check"] = ck.mass_error;
    j["w_constancy"] = ck.w_spread;
    return j;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const Family& fam,
                          const QuadSpec& q) {
    os << "param,scenario,a1,b1_re,b1_im,b2_re,b2_im,a2,a3,mass_check\n";
    for (const Sample& s : tr.samples) {
        const Row r = row_of(s.config);
        const FieldParams p = fam.at(s.param);
        const double mc = std::abs(mass_integral(s.config, p, q) - p.t) / std::max(1.0, p.t);
        os << fmt(s.param) << ',' << scenario_name(scenario_of(s.config)) << ',' << cell(r.a1)
           << ',' << cell(r.b1r) << ',' << cell(r.b1i) << ',' << cell(r.b2r) << ','
           << cell(r.b2i) << ',' << cell(r.a2) << ',' << cell(r.a3) << ',' << fmt(mc) << '\n';
    }
}

nlohmann::ordered_json events_json(const Trajectory& tr) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const TransitionEvent& e : tr.events) {
        nlohmann::ordered_json j;
        j["kind"] = event_name(e.kind);
        j[tr.parameter] = e.time;
        j["location"] = e.location;
        j["pre"] = config_json(e.pre);
        j["post"] = config_json(e.post);
        arr.push_back(j);
    }
    nlohmann::ordered_json out;
    out["parameter"] = tr.parameter;
    out["events"] = arr;
    return out;
}

std::string join_sequence(const std::vector<int>& s) {
    std::string r;
    for (std::size_t i = 0; i < s.size(); ++i) r += (i ? "-" : "") + std::to_string(s[i]);
    return r;
}

void write_phase_csv(std::ostream& os, const std::vector<PhaseCell>& cells) {
    os << "beta,gamma,region,sequence,expected,match,events,t_final,error\n";
    for (const PhaseCell& c : cells) {
        const auto exp = expected_sequence(c.region);
        std::string ev;
        for (std::size_t i = 0; i < c.times.size(); ++i)
            ev += (i ? ";" : "") + std::string(event_name(c.times[i].first)) + "@" + fmt(c.times[i].second);
        std::string err = c.error;
        std::replace(err.begin(), err.end(), ',', ';');
        os << fmt(c.beta) << ',' << fmt(c.gamma) << ',' << region_name(c.region) << ','
           << join_sequence(c.sequence) << ',' << join_sequence(exp) << ','
           << (exp.empty() || c.gamma == 0.0 ? "" : (exp == c.sequence ? "1" : "0")) << ',' << ev << ','
           << fmt(c.t_final) << ',' << err << '\n';
    }
}

void write_boundary_csv(std::ostream& os, const std::vector<CurvePoint>& pts) {
    os << "curve,beta,gamma\n";
    for (const CurvePoint& c : pts) os << c.curve << ',' << fmt(c.beta) << ',' << fmt(c.gamma) << '\n';
}

void write_density_csv(std::ostream& os, const SupportConfig& cfg, const FieldParams& p,
                       double lo, double hi, int n) {
    const DensityForm f = density_form(cfg, p.v);
    os << "x,density\n";
    for (int i = 0; i < n; ++i) {
        const double x = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
        os << fmt(x) << ',' << fmt(x < 0.0 ? 0.0 : f.density(x)) << '\n';
    }
}

void write_realline_density_csv(std::ostream& os, const SupportConfig& cfg, const FieldParams& p,
                                double lo, double hi, int n) {
    const RealLineMeasure m = halfline_to_realline(cfg, p.v);
    os << "y,density\n";
    for (int i = 0; i < n; ++i) {
        const double y = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
        os << fmt(y) << ',' << fmt(m.density(y)) << '\n';
    }
}

}  // namespace gpem
