#include <doctest.h>

#include "vbsim/commands.hpp"
#include "vbsim/config.hpp"
#include "vbsim/heatmap.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vbsim;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const fs::path kSource = VBSIM_SOURCE_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("vbsim_cli_" + name);
    fs::remove_all(p);
    return p;
}

// Collects the validation messages of a config text, or an empty list.
std::vector<std::string> errors_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigValidationError& e) {
        return e.errors();
    }
    return {};
}

bool any_contains(const std::vector<std::string>& errors, const std::string& needle) {
    return std::any_of(errors.begin(), errors.end(), [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

json minimal() {
    return json::parse(R"({
      "schema": 1,
      "domain": {"kind": "rectangle", "cell_size": 0.25, "width": 1.0, "height": 1.0},
      "parameters": {"beta_v": 0.2, "beta_h": 0.2, "D": 0.5, "epsilon": 0.5},
      "initial": {"host_density": 5.0, "vector_density": 5.0,
                  "introductions": [{"compartment": "I_v", "at": [0.1, 0.1], "amount": 1.0}]},
      "solver": {"dt": 0.05, "t_end": 2.0, "cadence": 0.5}
    })");
}

RunConfig tiny_gsa_config(int m) {
    json j = minimal();
    j["domain"] = {{"kind", "rectangle"}, {"cell_size", 0.5}, {"width", 1.0}, {"height", 1.0}};
    j["initial"]["introductions"][0]["at"] = {0.25, 0.25};
    j["solver"] = {{"dt", 0.1}, {"t_end", 1.0}, {"cadence", 0.5}};
    j["gsa"] = {{"M", m},
                {"ranges", {{"beta_v", {0.1, 0.5}}, {"beta_h", {0.1, 0.5}}, {"D", {0.1, 1.0}}}},
                {"times", {0.0, 1.0}},
                {"map_points", 4},
                {"heatmap", {{"nx", 6}, {"ny", 6}}}};
    j["transect"] = {{"start", {0.25, 0.25}}, {"direction", {1.0, 0.0}}, {"points", 2}};
    return parse_config_text(j.dump());
}

void check_manifest_complete(const CommandResult& r) {
    REQUIRE(r.exit_code == 0);
    const json m = json::parse(slurp(fs::path(r.out_dir) / "manifest.json"));
    CHECK(m["status"] == "ok");
    CHECK(m["config_hash"].get<std::string>().size() == 16);
    CHECK(m.contains("wall_time_s"));
    CHECK(m["versions"].contains("vbsim"));
    CHECK(m["artifacts"].size() == r.artifacts.size());
    for (const auto& a : m["artifacts"]) {
        const fs::path p = fs::path(r.out_dir) / a.get<std::string>();
        CHECK(fs::exists(p));
        CHECK(fs::file_size(p) > 0);
    }
}

} // namespace

TEST_CASE("bundled full-scale arc configuration parses with its ranges in file order") {
    const RunConfig c = parse_config((kSource / "configs" / "arc_full_gsa.json").string());
    REQUIRE(c.gsa.has_value());
    REQUIRE(c.gsa->ranges.size() == 3);
    CHECK(c.gsa->ranges[0].name == "beta_v");
    CHECK(c.gsa->ranges[0].low == 5.0);
    CHECK(c.gsa->ranges[0].high == 25.0);
    CHECK(c.gsa->ranges[1].name == "beta_h");
    CHECK(c.gsa->ranges[1].low == 5.0);
    CHECK(c.gsa->ranges[1].high == 25.0);
    CHECK(c.gsa->ranges[2].name == "D");
    CHECK(c.gsa->ranges[2].low == 5.0);
    CHECK(c.gsa->ranges[2].high == 15000.0);
    CHECK(c.gsa->m == 300);
    CHECK(c.epsilon == 0.02);
    CHECK(c.impulse_period == 1.0);
    CHECK(c.host_density == 300.0);
}

TEST_CASE("every bundled configuration parses and round-trips") {
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(kSource / "configs")) {
        if (entry.path().extension() != ".json") continue;
        ++seen;
        CAPTURE(entry.path().string());
        const RunConfig c = parse_config(entry.path().string());
        const RunConfig back = parse_config_text(serialize_config(c), c.base_dir);
        CHECK(back == c);
        CHECK(serialize_config(back) == serialize_config(c));
        CHECK(config_hash(back) == config_hash(c));
        CHECK_NOTHROW(make_domain(c.domain, c.base_dir));
    }
    CHECK(seen >= 4);
}

TEST_CASE("round trip keeps every optional section and solver choice") {
    json j = minimal();
    j["solver"]["scheme"] = "lie";
    j["solver"]["stages"] = "trapezoidal";
    j["parameters"]["formulation"] = "fickian";
    j["impulse"] = {{"period", 1.0}};
    j["transect"] = {{"start", {0.3, 0.4}}, {"direction", {0.0, 1.0}}, {"points", 3}, {"classes", 2},
                     {"compartments", {"E_h"}}};
    j["spectral"] = {{"potential", "constant"}, {"value", 0.3}};
    j["gsa"] = {{"M", 4}, {"ranges", {{"epsilon", {0.1, 0.2}}}}, {"times", {1.0}}, {"cache_dir", "c"}};
    const RunConfig c = parse_config_text(j.dump());
    CHECK(c.stages == StageIntegrator::kTrapezoidal);
    CHECK(c.scheme == SplittingScheme::kLie);
    CHECK(c.formulation == Formulation::kFickian);
    CHECK(parse_config_text(serialize_config(c)) == c);
}

TEST_CASE("validation errors are specific and collected together") {
    json zero_d = minimal();
    zero_d["parameters"]["D"] = 0.0;
    CHECK(any_contains(errors_of(zero_d.dump()), "nonpositive diffusion"));

    json bad_period = minimal();
    bad_period["impulse"] = {{"period", 0.33}};
    CHECK(any_contains(errors_of(bad_period.dump()), "dt does not divide the impulse period"));

    json many = minimal();
    many["parameters"]["betav"] = 1.0;
    many["parameters"]["D"] = -1.0;
    many["solver"].erase("t_end");
    many["colour"] = "blue";
    const auto errors = errors_of(many.dump());
    CHECK(errors.size() >= 4);
    CHECK(any_contains(errors, "parameters.betav: unknown key"));
    CHECK(any_contains(errors, "colour: unknown key"));
    CHECK(any_contains(errors, "solver.t_end: missing required key"));
    CHECK(any_contains(errors, "nonpositive diffusion"));

    json schema = minimal();
    schema["schema"] = 2;
    CHECK(any_contains(errors_of(schema.dump()), "unsupported version"));

    json outside = minimal();
    outside["initial"]["introductions"][0]["at"] = {5.0, 5.0};
    CHECK(any_contains(errors_of(outside.dump()), "introduction point outside domain"));

    json missing_file = minimal();
    missing_file["domain"] = {{"kind", "ascii"}, {"path", "no_such_mask.txt"}};
    CHECK(any_contains(errors_of(missing_file.dump()), "file not found"));

    json gsa_time = minimal();
    gsa_time["gsa"] = {{"M", 4}, {"ranges", {{"beta_v", {1.0, 2.0}}}}, {"times", {0.7}}};
    CHECK(any_contains(errors_of(gsa_time.dump()), "not a snapshot time"));

    CHECK_THROWS_AS(parse_config_text("{ not json"), ConfigError);
    CHECK(errors_of(minimal().dump()).empty());
}

TEST_CASE("simulate on a disease-free configuration writes zero infection") {
    json j = minimal();
    j["initial"]["introductions"] = json::array();
    const fs::path out = scratch("disease_free");
    CommandOptions o;
    o.out_dir = out.string();
    const CommandResult r = run_command(Command::kSimulate, parse_config_text(j.dump()), o);
    check_manifest_complete(r);
    std::istringstream csv(slurp(out / "snapshots.csv"));
    std::string line;
    std::getline(csv, line);
    std::vector<std::string> header;
    {
        std::istringstream h(line);
        for (std::string col; std::getline(h, col, ',');) header.push_back(col);
    }
    const auto ih = std::find(header.begin(), header.end(), "I_h") - header.begin();
    REQUIRE(ih < static_cast<long>(header.size()));
    int rows = 0;
    while (std::getline(csv, line)) {
        std::istringstream row(line);
        std::string cell;
        for (long k = 0; k <= ih; ++k) std::getline(row, cell, ',');
        CHECK(std::stod(cell) == 0.0);
        ++rows;
    }
    CHECK(rows == 16 * 5);
    fs::remove_all(out);
}

TEST_CASE("spectral with a constant potential reports that constant") {
    const fs::path out = scratch("spectral");
    CommandOptions o;
    o.out_dir = out.string();
    const CommandResult r = run_command_file(Command::kSpectral, (kSource / "configs" / "mask_spectral.json").string(), o);
    check_manifest_complete(r);
    const std::string report = slurp(out / "analysis_report.csv");
    const auto pos = report.find("lambda_1,");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(report.substr(pos + 9)) == doctest::Approx(0.75).epsilon(1e-10));
    fs::remove_all(out);
}

TEST_CASE("failures exit nonzero and land in the manifest") {
    const fs::path dir = scratch("bad_config");
    fs::create_directories(dir);
    json j = minimal();
    j["parameters"]["D"] = 0.0;
    j["output_dir"] = (dir / "out").string();
    std::ofstream(dir / "bad.json") << j.dump();
    const CommandResult r = run_command_file(Command::kSimulate, (dir / "bad.json").string(), {});
    CHECK(r.exit_code != 0);
    CHECK(r.error.find("nonpositive diffusion") != std::string::npos);
    const json m = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(m["status"] == "error");
    CHECK(m["errors"].size() >= 1);

    // A model error after validation: a zero transect direction.
    json t = minimal();
    t["transect"] = {{"start", {0.1, 0.1}}, {"direction", {0.0, 0.0}}};
    CommandOptions o;
    o.out_dir = (dir / "out2").string();
    const CommandResult r2 = run_command(Command::kTransect, parse_config_text(t.dump()), o);
    CHECK(r2.exit_code != 0);
    CHECK(json::parse(slurp(dir / "out2" / "manifest.json"))["status"] == "error");
    fs::remove_all(dir);
}

TEST_CASE("gsa at K=3, M=300 records 2100 evaluations") {
    const fs::path out = scratch("gsa_2100");
    CommandOptions o;
    o.out_dir = out.string();
    const CommandResult r = run_command(Command::kGsa, tiny_gsa_config(300), o);
    check_manifest_complete(r);
    const json m = json::parse(slurp(out / "manifest.json"));
    CHECK(m["metrics"]["evaluations"] == 2100);
    CHECK(m["metrics"]["simulations"] == 2100);
    CHECK(m["metrics"]["failed_rows"] == 0);
    // t = 0 is parameter independent.
    CHECK(m["metrics"]["degenerate_points"].get<int>() >= 4);
    const std::string results = slurp(out / "gsa_results.csv");
    CHECK(results.rfind("compartment,t,x,y,param,PI_raw,PI_clamped,TI_raw,TI_clamped,variance,mean,status\n", 0) == 0);
    CHECK(results.find("degenerate variance") != std::string::npos);
    const std::string design = slurp(out / "design.csv");
    CHECK(design.rfind("row_id,block,param_substituted,beta_v,beta_h,D\n", 0) == 0);
    CHECK(std::count(design.begin(), design.end(), '\n') == 2101);
    CHECK(fs::exists(out / "class_means_I_h_beta_v.csv"));
    CHECK(fs::exists(out / "heatmap_PI_I_h_t1_beta_v.csv"));
    fs::remove_all(out);
}

TEST_CASE("identical config and seed give byte-identical artifacts across worker counts") {
    const RunConfig c = tiny_gsa_config(20);
    const fs::path a = scratch("repro_a"), b = scratch("repro_b");
    CommandOptions oa, ob;
    oa.out_dir = a.string();
    ob.out_dir = b.string();
    ob.workers = 3;
    for (Command cmd : {Command::kGsa, Command::kSimulate, Command::kTransect, Command::kEquilibrium}) {
        CAPTURE(command_name(cmd));
        const CommandResult ra = run_command(cmd, c, oa);
        const CommandResult rb = run_command(cmd, c, ob);
        check_manifest_complete(ra);
        REQUIRE(ra.artifacts == rb.artifacts);
        for (const std::string& f : ra.artifacts) {
            CAPTURE(f);
            CHECK(slurp(a / f) == slurp(b / f));
        }
    }
    // A different seed changes the design.
    CommandOptions oc = oa;
    oc.seed = 99;
    run_command(Command::kGsa, c, oc);
    CHECK(slurp(a / "design.csv") != slurp(b / "design.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("gsa output cache serves a rerun without simulating") {
    RunConfig c = tiny_gsa_config(10);
    const fs::path out = scratch("cache_run");
    c.gsa->cache_dir = (out / "cache").string();
    CommandOptions o;
    o.out_dir = (out / "first").string();
    check_manifest_complete(run_command(Command::kGsa, c, o));
    o.out_dir = (out / "second").string();
    check_manifest_complete(run_command(Command::kGsa, c, o));
    const json m = json::parse(slurp(out / "second" / "manifest.json"));
    CHECK(m["metrics"]["simulations"] == 0);
    CHECK(m["metrics"]["cache_hits"] == 70);
    CHECK(slurp(out / "first" / "gsa_results.csv") == slurp(out / "second" / "gsa_results.csv"));
    fs::remove_all(out);
}

TEST_CASE("map cells: all cells or an evenly strided subset") {
    CHECK(map_cells(10, 600).size() == 10);
    const auto s = map_cells(1000, 600);
    CHECK(s.size() == 600);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
    CHECK(s.front() == 0);
    CHECK(s.back() < 1000);
}

TEST_CASE("command names") {
    for (Command c : {Command::kSimulate, Command::kEquilibrium, Command::kSpectral, Command::kGsa, Command::kTransect}) {
        CHECK(parse_command(command_name(c)) == c);
    }
    CHECK_FALSE(parse_command("plot").has_value());
}
