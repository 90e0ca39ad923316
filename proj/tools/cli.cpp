#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "gpem/fekete.hpp"
#include "gpem/flow.hpp"
#include "gpem/io.hpp"
#include "gpem/phase_map.hpp"

namespace gpem {

namespace {

constexpr const char* kVersion = "0.3.0";

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Range parse_range(const std::string& s) {
    const auto c1 = s.find(':'), c2 = s.rfind(':');
    if (c1 == std::string::npos || c1 == c2) throw InvalidArgument("range must be lo:hi:n, got '" + s + "'");
    try {
        std::size_t used = 0;
        const std::string n_str = s.substr(c2 + 1);
        Range r{std::stod(s.substr(0, c1)), std::stod(s.substr(c1 + 1, c2 - c1 - 1)), std::stoi(n_str, &used)};
        if (used != n_str.size() || r.n < 1) throw InvalidArgument("");
        return r;
    } catch (const std::exception&) {
        throw InvalidArgument("range must be lo:hi:n, got '" + s + "'");
    }
}

// Writes a whole file at once; "-" means the command's stdout.
class Sink {
public:
    Sink(std::ostream& out) : out_(out) {}
    void write(const std::string& path, const std::string& body) {
        if (path == "-") {
            out_ << body;
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot open '" + path + "' for writing");
        f << body;
        f.close();
        if (!f) throw IoError("write to '" + path + "' failed");
        written.push_back(path);
    }
    std::vector<std::string> written;

private:
    std::ostream& out_;
};

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

struct Common {
    double quad_tol = QuadSpec{}.tol;
    double ode_tol = FlowOptions{}.ode_tol;
    std::string manifest;
    bool timing = false;
    QuadSpec quad() const {
        QuadSpec q;
        q.tol = quad_tol;
        return q;
    }
    FlowOptions flow() const {
        FlowOptions f;
        f.quad = quad();
        f.ode_tol = ode_tol;
        return f;
    }
};

void add_common(CLI::App* c, Common& o) {
    c->add_option("--quad-tol", o.quad_tol, "quadrature tolerance")->check(CLI::PositiveNumber);
    c->add_option("--ode-tol", o.ode_tol, "ODE local error target")->check(CLI::PositiveNumber);
    c->add_option("--manifest", o.manifest, "write a run manifest (JSON) to this path");
    c->add_flag("--timing", o.timing, "record wall time in the manifest");
}

void write_manifest(Sink& sink, const Common& c, const std::string& cmd,
                    const nlohmann::ordered_json& params, double seconds) {
    if (c.manifest.empty()) return;
    nlohmann::ordered_json m;
    m["subcommand"] = cmd;
    m["version"] = kVersion;
    m["parameters"] = params;
    m["parameters"]["quad_tol"] = c.quad_tol;
    m["parameters"]["ode_tol"] = c.ode_tol;
    if (c.timing) m["wall_time_s"] = seconds;
    m["outputs"] = sink.written;
    sink.write(c.manifest, dump(m));
}

struct FieldFlags {
    double beta = 0.0, gamma = 0.0, t = 1.0, v = 1.0;
    std::optional<double> b, c, t_real;
};

void add_field(CLI::App* c, FieldFlags& f, bool with_t = true) {
    c->add_option("--beta", f.beta, "linear coefficient");
    c->add_option("--gamma", f.gamma, "logarithmic coefficient (nonzero)");
    if (with_t) c->add_option("--t", f.t, "total mass");
    c->add_option("--v", f.v, "pole position (log(x+v))");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Equilibrium measures in the Gauss-Penner field on [0, inf)", "gpem"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Common com;
    std::string cmd;
    nlohmann::ordered_json params;
    std::function<void(Sink&)> action;

    // solve
    FieldFlags sf;
    auto* solve = app.add_subcommand("solve", "solve for the equilibrium support at one parameter point");
    add_field(solve, sf);
    solve->add_option("--b", sf.b, "real-line quadratic coefficient (x^4/4 + b x^2 + c log(x^2+v))");
    solve->add_option("--c", sf.c, "real-line log coefficient");
    solve->add_option("--t-real", sf.t_real, "real-line mass");
    std::string solve_out = "-";
    solve->add_option("--out", solve_out, "JSON output path ('-' = stdout)");
    add_common(solve, com);
    solve->callback([&] {
        cmd = "solve";
        action = [&](Sink& sink) {
            FieldParams p;
            if (sf.b || sf.c || sf.t_real) {
                if (!(sf.b && sf.c && sf.t_real)) throw InvalidArgument("--b, --c and --t-real go together");
                p = rescale(*sf.b, *sf.c, sf.v, *sf.t_real);
                params["real_line"] = {{"b", *sf.b}, {"c", *sf.c}, {"v", sf.v}, {"t_real", *sf.t_real}};
            } else {
                p = FieldParams{sf.beta, sf.gamma, sf.t, sf.v};
            }
            validate(p);
            params["beta"] = p.beta, params["gamma"] = p.gamma, params["t"] = p.t, params["v"] = p.v;
            SolverOptions so;
            so.quad = com.quad();
            const SolveReport r = solve_at(p, std::nullopt, so);
            sink.write(solve_out, dump(solve_json(r, p, so.quad)));
        };
    });

    // flow / vflow
    FieldFlags ff;
    double t_min = 1e-2, t_max = 50.0, v_min = 1e-6, v_max = 1.0;
    int samples = 200;
    std::string traj_out = "trajectory.csv", events_out = "events.json", format = "csv";
    auto* flow = app.add_subcommand("flow", "evolve the support in the mass t");
    add_field(flow, ff, false);
    flow->add_option("--t-min", t_min, "start mass")->check(CLI::PositiveNumber);
    flow->add_option("--t-max", t_max, "end mass")->check(CLI::PositiveNumber);
    auto* vflow = app.add_subcommand("vflow", "evolve the support as the pole -v moves to the origin");
    add_field(vflow, ff, true);
    vflow->add_option("--v-max", v_max, "start pole position")->check(CLI::PositiveNumber);
    vflow->add_option("--v-min", v_min, "end pole position")->check(CLI::PositiveNumber);
    for (auto* c : {flow, vflow}) {
        c->add_option("--samples", samples, "geometric output grid size")->check(CLI::Range(2, 1000000));
        c->add_option("--out", traj_out, "trajectory path ('-' = stdout)");
        c->add_option("--events", events_out, "events JSON path");
        c->add_option("--format", format, "trajectory format")->check(CLI::IsMember({"csv", "json"}));
        add_common(c, com);
    }
    auto run_flow = [&](bool in_v) {
        return [&, in_v](Sink& sink) {
            FlowOptions fo = com.flow();
            fo.samples = samples;
            Trajectory tr;
            Family fam;
            if (in_v) {
                const FieldParams p = make_params(ff.beta, ff.gamma, ff.t, v_max);
                params = {{"beta", p.beta}, {"gamma", p.gamma}, {"t", p.t}, {"v_max", v_max}, {"v_min", v_min}};
                tr = evolve_v(p, v_max, v_min, fo);
                fam = Family{Family::Param::V, p.beta, p.gamma, p.t};
            } else {
                const FieldParams p = make_params(ff.beta, ff.gamma, t_min, ff.v);
                params = {{"beta", p.beta}, {"gamma", p.gamma}, {"v", p.v}, {"t_min", t_min}, {"t_max", t_max}};
                tr = evolve_t(p, t_min, t_max, fo);
                fam = Family{Family::Param::T, p.beta, p.gamma, p.v};
            }
            params["samples"] = samples;
            std::ostringstream body;
            if (format == "csv") {
                write_trajectory_csv(body, tr, fam, fo.quad);
            } else {
                nlohmann::ordered_json arr = nlohmann::ordered_json::array();
                for (const Sample& s : tr.samples) {
                    auto j = config_json(s.config);
                    j[tr.parameter] = s.param;
                    arr.push_back(j);
                }
                body << dump(arr);
            }
            sink.write(traj_out, body.str());
            sink.write(events_out, dump(events_json(tr)));
        };
    };
    flow->callback([&] { cmd = "flow"; action = run_flow(false); });
    vflow->callback([&] { cmd = "vflow"; action = run_flow(true); });

    // phasemap
    std::string beta_r = "-8:2:6", gamma_r = "-2:13:6", cells_out = "cells.csv", curves_out = "boundaries.csv";
    int jobs = 0, curve_n = 41;
    auto* pm = app.add_subcommand("phasemap", "phase sequences over a (beta, gamma) grid");
    pm->add_option("--beta", beta_r, "beta range lo:hi:n (inclusive, n points)");
    pm->add_option("--gamma", gamma_r, "gamma range lo:hi:n (inclusive, n points)");
    pm->add_option("--jobs", jobs, "worker threads (default: number of processors)");
    pm->add_option("--out", cells_out, "cell table CSV path");
    pm->add_option("--boundaries", curves_out, "boundary-curve CSV path");
    pm->add_option("--curve-points", curve_n, "boundary samples along beta")->check(CLI::Range(2, 100000));
    add_common(pm, com);
    pm->callback([&] {
        cmd = "phasemap";
        action = [&](Sink& sink) {
            const Range b = parse_range(beta_r), g = parse_range(gamma_r);
            PhaseOptions po;
            po.flow = com.flow();
            params = {{"beta", beta_r}, {"gamma", gamma_r}, {"curve_points", curve_n}};
            const auto cells = phase_grid(b, g, jobs, po);
            std::ostringstream cs, bs;
            write_phase_csv(cs, cells);
            write_boundary_csv(bs, boundary_curves(b.lo, b.hi, curve_n));
            sink.write(cells_out, cs.str());
            sink.write(curves_out, bs.str());
        };
    });

    // density
    FieldFlags df;
    int points = 401;
    bool realline = false;
    std::optional<double> lo, hi;
    std::string dens_out = "-";
    auto* dens = app.add_subcommand("density", "sample the equilibrium density on a grid");
    add_field(dens, df);
    dens->add_option("--points", points, "grid size")->check(CLI::Range(1, 10000000));
    dens->add_option("--lo", lo, "grid start (default: support start)");
    dens->add_option("--hi", hi, "grid end (default: support end)");
    dens->add_flag("--realline", realline, "sample the symmetric real-line density in y = ±sqrt(x)");
    dens->add_option("--out", dens_out, "CSV path ('-' = stdout)");
    add_common(dens, com);
    dens->callback([&] {
        cmd = "density";
        action = [&](Sink& sink) {
            const FieldParams p = make_params(df.beta, df.gamma, df.t, df.v);
            SolverOptions so;
            so.quad = com.quad();
            const SolveReport r = solve_at(p, std::nullopt, so);
            const double R = support_right(r.config);
            std::ostringstream body;
            if (realline) {
                const double y = std::sqrt(R);
                write_realline_density_csv(body, r.config, p, lo.value_or(-y), hi.value_or(y), points);
            } else {
                write_density_csv(body, r.config, p, lo.value_or(support_left(r.config)), hi.value_or(R), points);
            }
            params = {{"beta", p.beta}, {"gamma", p.gamma}, {"t", p.t}, {"v", p.v}, {"points", points}, {"realline", realline}};
            sink.write(dens_out, body.str());
        };
    });

    // fekete
    FieldFlags kf;
    int n = 100, threads = 1;
    std::uint64_t seed = 0;
    std::string pts_out = "points.csv", summary_out = "-";
    auto* fk = app.add_subcommand("fekete", "minimize the discrete weighted energy of n particles");
    add_field(fk, kf);
    fk->add_option("--n", n, "number of particles")->check(CLI::Range(8, 100000));
    fk->add_option("--seed", seed, "start jitter seed (0 = none)");
    fk->add_option("--threads", threads, "kernel threads");
    fk->add_option("--out", pts_out, "particle CSV path");
    fk->add_option("--summary", summary_out, "summary JSON path ('-' = stdout)");
    add_common(fk, com);
    fk->callback([&] {
        cmd = "fekete";
        action = [&](Sink& sink) {
            const FieldParams p = make_params(kf.beta, kf.gamma, kf.t, kf.v);
            FeketeOptions fo;
            fo.threads = threads;
            const ParticleConfig pc = minimize_energy(n, p, seed, fo);
            std::ostringstream body;
            body << "i,x\n";
            for (std::size_t i = 0; i < pc.points.size(); ++i) body << i << ',' << fmt(pc.points[i]) << '\n';
            nlohmann::ordered_json s;
            s["n"] = n;
            s["energy"] = pc.energy;
            s["max_projected_gradient"] = pc.max_gradient;
            s["iterations"] = pc.iterations;
            try {
                SolverOptions so;
                so.quad = com.quad();
                const SolveReport r = solve_at(p, std::nullopt, so);
                s["ks_distance"] = ks_distance(pc.points, r.config, p);
                s["continuum"] = config_json(r.config);
            } catch (const SolveError&) {
                s["ks_distance"] = nullptr;
            }
            params = {{"beta", p.beta}, {"gamma", p.gamma}, {"t", p.t}, {"v", p.v}, {"n", n}, {"seed", seed}};
            sink.write(pts_out, body.str());
            sink.write(summary_out, dump(s));
        };
    });

    // vc
    double vc_tol = 1e-9;
    auto* vc = app.add_subcommand("vc", "critical coupling of the quartic-Penner model");
    vc->add_option("--tol", vc_tol, "bisection tolerance")->check(CLI::PositiveNumber);
    add_common(vc, com);
    vc->callback([&] {
        cmd = "vc";
        action = [&](Sink& sink) {
            params = {{"tol", vc_tol}};
            sink.write("-", fmt(find_vc(vc_tol)) + "\n");
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    Sink sink(out);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        action(sink);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(sink, com, cmd, params, secs);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        // solver and tracking failures: no admissible configuration was found
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace gpem
