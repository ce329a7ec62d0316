#include "vbsim/commands.hpp"

#include "vbsim/analysis.hpp"
#include "vbsim/csv_export.hpp"
#include "vbsim/gsa.hpp"
#include "vbsim/heatmap.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace vbsim {

using nlohmann::json;
namespace fs = std::filesystem;

std::optional<Command> parse_command(const std::string& name) {
    if (name == "simulate") return Command::kSimulate;
    if (name == "equilibrium") return Command::kEquilibrium;
    if (name == "spectral") return Command::kSpectral;
    if (name == "gsa") return Command::kGsa;
    if (name == "transect") return Command::kTransect;
    return std::nullopt;
}

std::string command_name(Command c) {
    switch (c) {
    case Command::kSimulate: return "simulate";
    case Command::kEquilibrium: return "equilibrium";
    case Command::kSpectral: return "spectral";
    case Command::kGsa: return "gsa";
    case Command::kTransect: return "transect";
    }
    return "?";
}

std::vector<int> map_cells(std::size_t cells, int count) {
    std::vector<int> out;
    if (count <= 0) return out;
    if (static_cast<std::size_t>(count) >= cells) {
        for (std::size_t i = 0; i < cells; ++i) out.push_back(static_cast<int>(i));
        return out;
    }
    for (int k = 0; k < count; ++k) {
        out.push_back(static_cast<int>((static_cast<double>(k) + 0.5) * static_cast<double>(cells) / count));
    }
    return out;
}

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string label(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

class Session {
public:
    Session(const RunConfig& config, std::string out_dir) : config_(config), out_(std::move(out_dir)) {
        fs::create_directories(out_);
    }

    std::ofstream open(const std::string& name) {
        artifacts_.push_back(name);
        std::ofstream f(fs::path(out_) / name, std::ios::binary);
        if (!f) throw Error("cannot write " + name);
        return f;
    }

    json& metrics() { return metrics_; }
    const std::vector<std::string>& artifacts() const { return artifacts_; }
    const RunConfig& config() const { return config_; }

private:
    const RunConfig& config_;
    std::string out_;
    std::vector<std::string> artifacts_;
    json metrics_ = json::object();
};

Transect configured_transect(const RunConfig& c, const SpatialDomain& domain) {
    Point start;
    if (c.transect.start) {
        start = *c.transect.start;
    } else if (!c.introductions.empty()) {
        start = c.introductions.front().location;
    } else {
        start = domain.center(static_cast<int>(domain.size() / 2));
    }
    return make_transect(domain, start, c.transect.direction, c.transect.points);
}

void put(json& metrics, const std::string& key, double v) {
    if (std::isfinite(v)) {
        metrics[key] = v;
    } else {
        metrics[key] = nullptr;
    }
}

void cmd_simulate(Session& s) {
    const RunConfig& c = s.config();
    const auto domain = make_domain(c.domain, c.base_dir);
    const Trajectory traj = simulate(make_simulation(c, domain));
    {
        auto f = s.open("snapshots.csv");
        write_snapshots(f, *domain, traj);
    }
    {
        auto f = s.open("ledger.csv");
        write_ledger(f, traj);
    }
    json& m = s.metrics();
    m["model"] = c.impulse_period ? "M2" : "M1";
    m["cells"] = domain->size();
    m["steps"] = traj.diagnostics.steps;
    put(m, "max_host_deviation", traj.diagnostics.max_host_deviation);
    put(m, "max_vector_step_drift", traj.diagnostics.max_vector_step_drift);
    put(m, "max_vector_drift_since_reset", traj.diagnostics.max_vector_drift_since_reset);
    put(m, "clamped_mass", traj.diagnostics.clamped_mass);
}

ReportRow fit_row(const std::string& quantity, const std::vector<double>& times, const std::vector<double>& values) {
    try {
        const DecayFit fit = fit_decay_rate(times, values);
        return {quantity, fit.lambda, fit.r_squared};
    } catch (const AnalysisError&) {
        return {quantity, kNaN, kNaN};
    }
}

void cmd_equilibrium(Session& s) {
    const RunConfig& c = s.config();
    const auto domain = make_domain(c.domain, c.base_dir);
    const SimulationConfig sim = make_simulation(c, domain);
    const std::vector<double> hosts = sim.initial.host_totals();
    const double c_star = sim.initial.vector_integral(domain->cell_area());
    const EquilibriumPair eq = equilibria_m1(sim.params, *domain, hosts, c_star);
    {
        auto f = s.open("equilibria.csv");
        f << "state,x,y,S_h,E_h,I_h,S_v,I_v\n";
        for (const auto& [name, st] : {std::pair{"disease_free", &eq.disease_free}, std::pair{"endemic", &eq.endemic}}) {
            for (std::size_t i = 0; i < st->size(); ++i) {
                const Point p = domain->center(static_cast<int>(i));
                f << name << ',' << format_number(p.x) << ',' << format_number(p.y) << ',' << format_number(st->sh[i])
                  << ',' << format_number(st->eh[i]) << ',' << format_number(st->ih[i]) << ','
                  << format_number(st->sv[i]) << ',' << format_number(st->iv[i]) << '\n';
            }
        }
    }
    json& m = s.metrics();
    m["c_star"] = c_star;
    std::vector<ReportRow> report;
    if (!c.impulse_period) {
        m["model"] = "M1";
        const Trajectory traj = simulate_m1(sim);
        std::vector<double> dist, sh, eh, sv, spread;
        for (const StateFields& st : traj.snapshots) {
            dist.push_back(sup_distance(st, eq.endemic));
            double msh = 0.0, meh = 0.0, msv = 0.0;
            for (std::size_t i = 0; i < st.size(); ++i) {
                msh = std::max(msh, st.sh[i]);
                meh = std::max(meh, st.eh[i]);
                msv = std::max(msv, sim.params.diffusion[i] * st.sv[i]);
            }
            sh.push_back(msh);
            eh.push_back(meh);
            sv.push_back(msv);
            spread.push_back(iv_spread_l2mu(*domain, sim.params.diffusion, st.iv));
        }
        report.push_back(fit_row("sup_distance_to_endemic", traj.times, dist));
        report.push_back(fit_row("max_S_h", traj.times, sh));
        report.push_back(fit_row("max_E_h", traj.times, eh));
        report.push_back(fit_row("max_D_S_v", traj.times, sv));
        report.push_back(fit_row("l2mu_i_v_to_mean", traj.times, spread));
        put(m, "final_sup_distance_to_endemic", dist.back());
    } else {
        m["model"] = "M2";
        const PeriodicOrbit orbit =
            periodic_equilibrium_m2(sim.params, *domain, hosts, *sim.impulse, sim.dt, sim.dt, sim.scheme, sim.stages);
        {
            auto f = s.open("periodic_orbit.csv");
            f << "t,x,y,S_v,I_v\n";
            for (std::size_t k = 0; k < orbit.times.size(); ++k) {
                for (std::size_t i = 0; i < domain->size(); ++i) {
                    const Point p = domain->center(static_cast<int>(i));
                    f << format_number(orbit.times[k]) << ',' << format_number(p.x) << ',' << format_number(p.y) << ','
                      << format_number(orbit.sv[k][i]) << ',' << format_number(orbit.iv[k][i]) << '\n';
                }
            }
        }
        const OrbitComparison cmp = compare_final_period(sim, orbit);
        put(m, "final_period_relative_l2", cmp.relative_l2);
        report.push_back({"final_period_relative_l2", cmp.relative_l2, kNaN});
    }
    auto f = s.open("analysis_report.csv");
    write_analysis_report(f, report);
}

void cmd_spectral(Session& s) {
    const RunConfig& c = s.config();
    const auto domain = make_domain(c.domain, c.base_dir);
    const SimulationConfig sim = make_simulation(c, domain);
    std::vector<double> potential(domain->size(), c.spectral.value);
    if (c.spectral.potential == "initial_infection") {
        for (std::size_t i = 0; i < domain->size(); ++i) {
            // i_h(0) N beta_h = I_h(0) beta_h
            potential[i] = sim.initial.ih[i] * sim.params.beta_h[i];
        }
    }
    const SpectralResult r = principal_eigenvalue(*domain, sim.params.diffusion, potential);
    {
        auto f = s.open("eigenpair.csv");
        write_eigenpair(f, *domain, r);
    }
    {
        auto f = s.open("analysis_report.csv");
        write_analysis_report(f, {{"lambda_1", r.lambda_1, kNaN}});
    }
    put(s.metrics(), "lambda_1", r.lambda_1);
    s.metrics()["iterations"] = r.iterations;
}

void cmd_transect(Session& s) {
    const RunConfig& c = s.config();
    const auto domain = make_domain(c.domain, c.base_dir);
    const Trajectory traj = simulate(make_simulation(c, domain));
    const Transect tr = configured_transect(c, *domain);
    for (Compartment comp : c.transect.compartments) {
        const std::string name = compartment_name(comp);
        auto f = s.open("transect_" + name + ".csv");
        write_transect(f, tr, traj.times, extract_transect(traj, tr, comp), name);
    }
}

void cmd_gsa(Session& s, const CommandOptions& options) {
    const RunConfig& c = s.config();
    if (!c.gsa) throw ConfigError("gsa section missing from config");
    const GsaSpec& g = *c.gsa;
    const auto domain = make_domain(c.domain, c.base_dir);
    const SimulationConfig base = make_simulation(c, domain);

    const GsaDesign design = make_design(g.ranges, g.m, c.seed);
    {
        auto f = s.open("design.csv");
        write_design_manifest(f, design);
    }

    const std::vector<int> cells = map_cells(domain->size(), g.map_points);
    std::vector<OutputPoint> points;
    for (Compartment comp : g.compartments) {
        for (double t : g.times) {
            for (int cell : cells) points.push_back({comp, t, cell});
        }
    }
    const std::size_t map_count = points.size();

    // Transect series ride along as extra outputs for the class means.
    const Transect tr = configured_transect(c, *domain);
    const long snapshots = whole_steps(c.t_end, c.cadence, "t_end over cadence") + 1;
    std::vector<double> times;
    for (long k = 0; k < snapshots; ++k) times.push_back(static_cast<double>(k) * c.cadence);
    for (Compartment comp : c.transect.compartments) {
        for (int cell : tr.cells) {
            for (double t : times) points.push_back({comp, t, cell});
        }
    }

    RunConfig key_config = c;
    key_config.gsa.reset();
    key_config.seed = 0;
    key_config.output_dir.clear();
    GsaOptions opts;
    opts.workers = options.workers;
    opts.cache_dir = g.cache_dir;
    opts.cache_key = config_hash(key_config);

    const Runner runner = [&](std::span<const double> values) {
        SimulationConfig sim = base;
        sim.params = with_parameters(base.params, g.ranges, values);
        return simulate(sim);
    };
    const GsaRun run = spatiotemporal_gsa(runner, design, points, opts);

    const std::vector<SensitivityResult> map_results(run.results.begin(),
                                                     run.results.begin() + static_cast<std::ptrdiff_t>(map_count));
    {
        auto f = s.open("gsa_results.csv");
        write_gsa_results(f, *domain, design, map_results);
    }

    json skipped = json::array();
    std::size_t r = 0;
    for (Compartment comp : g.compartments) {
        for (double t : g.times) {
            for (std::size_t p = 0; p < design.ranges.size(); ++p) {
                std::vector<Point> where;
                std::vector<double> values;
                for (std::size_t k = 0; k < cells.size(); ++k) {
                    const SobolIndices& ix = map_results[r + k].indices;
                    if (ix.status != IndexStatus::kOk) continue;
                    where.push_back(domain->center(cells[k]));
                    values.push_back(ix.pi(p));
                }
                const std::string name =
                    "heatmap_PI_" + compartment_name(comp) + "_t" + label(t) + "_" + design.ranges[p].name + ".csv";
                try {
                    const HeatmapGrid grid = interpolate_heatmap(*domain, where, values, g.heatmap_nx, g.heatmap_ny);
                    auto f = s.open(name);
                    write_heatmap(f, grid);
                } catch (const GeometryError& e) {
                    skipped.push_back({{"file", name}, {"reason", e.what()}});
                }
            }
            r += cells.size();
        }
    }

    {
        auto f = s.open("transect_points.csv");
        f << "point,x,y\n";
        for (std::size_t p = 0; p < tr.points.size(); ++p) {
            f << p + 1 << ',' << format_number(tr.points[p].x) << ',' << format_number(tr.points[p].y) << '\n';
        }
    }
    const std::size_t per_comp = tr.cells.size() * times.size();
    for (std::size_t ci = 0; ci < c.transect.compartments.size(); ++ci) {
        const std::size_t offset = map_count + ci * per_comp;
        for (std::size_t p = 0; p < design.ranges.size(); ++p) {
            std::vector<double> param_values;
            std::vector<std::vector<double>> series;
            for (std::size_t row = 0; row < design.rows.size(); ++row) {
                if (!run.row_errors[row].empty()) continue;
                param_values.push_back(design.rows[row].values[p]);
                series.emplace_back(run.outputs[row].begin() + static_cast<std::ptrdiff_t>(offset),
                                    run.outputs[row].begin() + static_cast<std::ptrdiff_t>(offset + per_comp));
            }
            const ClassMeans cm = class_means(param_values, design.ranges[p], series, c.transect.classes);
            auto f = s.open("class_means_" + compartment_name(c.transect.compartments[ci]) + "_" +
                            design.ranges[p].name + ".csv");
            write_class_means(f, design.ranges[p].name, cm, times, tr.cells.size());
        }
    }

    std::size_t failed = 0, degenerate = 0, missing = 0;
    for (const std::string& e : run.row_errors) failed += e.empty() ? 0 : 1;
    for (const SensitivityResult& res : map_results) {
        degenerate += res.indices.status == IndexStatus::kDegenerate ? 1 : 0;
        missing += res.indices.status == IndexStatus::kMissing ? 1 : 0;
    }
    json& m = s.metrics();
    m["K"] = design.k;
    m["M"] = design.m;
    m["evaluations"] = design.rows.size();
    m["simulations"] = run.simulations;
    m["cache_hits"] = run.cache_hits;
    m["failed_rows"] = failed;
    m["output_points"] = map_count;
    m["degenerate_points"] = degenerate;
    m["missing_points"] = missing;
    m["skipped_heatmaps"] = skipped;
}

void write_manifest(const std::string& out_dir, const json& manifest) {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "manifest.json");
    f << manifest.dump(2) << '\n';
}

json versions() {
    json v;
    v["vbsim"] = kVersion;
    v["config_schema"] = kConfigSchema;
    v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
#ifdef __VERSION__
    v["compiler"] = __VERSION__;
#endif
#ifdef _OPENMP
    v["openmp"] = _OPENMP;
#endif
    return v;
}

} // namespace

CommandResult run_command(Command command, const RunConfig& config_in, const CommandOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    RunConfig config = config_in;
    if (options.seed) config.seed = *options.seed;
    CommandResult result;
    result.out_dir = options.out_dir.value_or(config.output_dir);

    json manifest;
    manifest["command"] = command_name(command);
    manifest["config_hash"] = config_hash(config);
    manifest["seed"] = config.seed;
    manifest["workers"] = options.workers;
    manifest["versions"] = versions();
    try {
        Session session(config, result.out_dir);
        try {
            switch (command) {
            case Command::kSimulate: cmd_simulate(session); break;
            case Command::kEquilibrium: cmd_equilibrium(session); break;
            case Command::kSpectral: cmd_spectral(session); break;
            case Command::kGsa: cmd_gsa(session, options); break;
            case Command::kTransect: cmd_transect(session); break;
            }
        } catch (...) {
            result.artifacts = session.artifacts();
            manifest["metrics"] = session.metrics();
            throw;
        }
        result.artifacts = session.artifacts();
        manifest["metrics"] = session.metrics();
        manifest["status"] = "ok";
    } catch (const std::exception& e) {
        result.exit_code = 1;
        result.error = e.what();
        manifest["status"] = "error";
        manifest["error"] = e.what();
    }
    manifest["artifacts"] = result.artifacts;
    manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        write_manifest(result.out_dir, manifest);
    } catch (const std::exception& e) {
        result.exit_code = 1;
        result.error += std::string(result.error.empty() ? "" : "; ") + "cannot write manifest: " + e.what();
    }
    return result;
}

namespace {

// Best-effort output directory of a config that failed validation.
std::string raw_output_dir(const std::string& config_path) {
    try {
        std::ifstream f(config_path);
        const json j = json::parse(f);
        if (j.is_object() && j.contains("output_dir") && j["output_dir"].is_string()) {
            return j["output_dir"].get<std::string>();
        }
    } catch (const std::exception&) {
    }
    return "out";
}

} // namespace

CommandResult run_command_file(Command command, const std::string& config_path, const CommandOptions& options) {
    RunConfig config;
    try {
        config = parse_config(config_path);
    } catch (const ConfigValidationError& e) {
        CommandResult result;
        result.exit_code = 2;
        result.out_dir = options.out_dir.value_or(raw_output_dir(config_path));
        result.error = e.what();
        json manifest;
        manifest["command"] = command_name(command);
        manifest["status"] = "error";
        manifest["error"] = e.what();
        manifest["errors"] = e.errors();
        manifest["artifacts"] = json::array();
        manifest["versions"] = versions();
        try {
            write_manifest(result.out_dir, manifest);
        } catch (const std::exception&) {
        }
        return result;
    }
    return run_command(command, config, options);
}

} // namespace vbsim
