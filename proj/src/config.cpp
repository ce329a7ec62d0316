#include "vbsim/config.hpp"

#include "vbsim/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace vbsim {

// Insertion order matters: GSA ranges become design columns in file order.
using json = nlohmann::ordered_json;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
    std::string text = "invalid config:";
    for (const auto& e : errors) text += "\n  " + e;
    return text;
}

std::string format_time(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

std::string formulation_name(Formulation f) { return f == Formulation::kFickian ? "fickian" : "nonfickian"; }
std::string scheme_name(SplittingScheme s) { return s == SplittingScheme::kLie ? "lie" : "strang"; }
std::string stage_name(StageIntegrator s) {
    return s == StageIntegrator::kTrapezoidal ? "trapezoidal" : "implicit_euler";
}

const std::set<std::string> kParameterNames{"beta_v", "beta_h", "D", "epsilon"};

// Typed access to a JSON object that records every problem instead of stopping.
class Reader {
public:
    Reader(const json& obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors) {}

    bool is_object() const { return obj_.is_object(); }

    void allow(std::initializer_list<const char*> keys) const {
        if (!obj_.is_object()) {
            errors_.push_back(path_ + ": expected an object");
            return;
        }
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& [key, value] : obj_.items()) {
            if (!allowed.count(key)) errors_.push_back(where(key) + ": unknown key");
        }
    }

    bool has(const char* key) const { return obj_.is_object() && obj_.contains(key); }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* get(const char* key, bool required) const {
        if (!obj_.is_object()) return nullptr;
        const auto it = obj_.find(key);
        if (it == obj_.end()) {
            if (required) errors_.push_back(where(key) + ": missing required key");
            return nullptr;
        }
        return &*it;
    }

    double number(const char* key, double fallback, bool required = false) const {
        const json* v = get(key, required);
        if (!v) return fallback;
        if (!v->is_number()) {
            errors_.push_back(where(key) + ": expected a number");
            return fallback;
        }
        return v->get<double>();
    }

    long integer(const char* key, long fallback, bool required = false) const {
        const json* v = get(key, required);
        if (!v) return fallback;
        if (!v->is_number_integer()) {
            errors_.push_back(where(key) + ": expected an integer");
            return fallback;
        }
        return v->get<long>();
    }

    std::string text(const char* key, std::string fallback, bool required = false) const {
        const json* v = get(key, required);
        if (!v) return fallback;
        if (!v->is_string()) {
            errors_.push_back(where(key) + ": expected a string");
            return fallback;
        }
        return v->get<std::string>();
    }

    std::optional<Point> point(const char* key, bool required = false) const {
        const json* v = get(key, required);
        if (!v) return std::nullopt;
        if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
            errors_.push_back(where(key) + ": expected [x, y]");
            return std::nullopt;
        }
        return Point{(*v)[0].get<double>(), (*v)[1].get<double>()};
    }

    std::vector<Compartment> compartments(const char* key, std::vector<Compartment> fallback) const {
        const json* v = get(key, false);
        if (!v) return fallback;
        std::vector<Compartment> out;
        if (!v->is_array() || v->empty()) {
            errors_.push_back(where(key) + ": expected a nonempty list of compartment names");
            return fallback;
        }
        for (const auto& item : *v) {
            try {
                out.push_back(parse_compartment(item.is_string() ? item.get<std::string>() : std::string("?")));
            } catch (const Error&) {
                errors_.push_back(where(key) + ": unknown compartment " + item.dump());
            }
        }
        return out;
    }

    Reader child(const char* key, bool required = false) const {
        const json* v = get(key, required);
        static const json kEmpty = json::object();
        return Reader(v ? *v : kEmpty, where(key), errors_);
    }

    const json& raw() const { return obj_; }

    void error(const std::string& key, const std::string& message) const { errors_.push_back(where(key) + ": " + message); }

private:
    const json& obj_;
    std::string path_;
    std::vector<std::string>& errors_;
};

std::vector<Ring> read_rings(const json& value, const std::string& where, std::vector<std::string>& errors) {
    std::vector<Ring> rings;
    if (!value.is_array()) {
        errors.push_back(where + ": expected a list of rings");
        return rings;
    }
    for (const auto& r : value) {
        Ring ring;
        bool ok = r.is_array();
        if (ok) {
            for (const auto& p : r) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                    ok = false;
                    break;
                }
                ring.push_back({p[0].get<double>(), p[1].get<double>()});
            }
        }
        if (!ok) {
            errors.push_back(where + ": each ring must be a list of [x, y] vertices");
            continue;
        }
        rings.push_back(std::move(ring));
    }
    return rings;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    const std::filesystem::path p(path);
    return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).string();
}

void validate(const RunConfig& c, std::vector<std::string>& errors) {
    if (!(c.diffusion > 0.0)) errors.push_back("parameters.D: nonpositive diffusion");
    if (!(c.beta_v >= 0.0)) errors.push_back("parameters.beta_v: negative contact rate");
    if (!(c.beta_h >= 0.0)) errors.push_back("parameters.beta_h: negative contact rate");
    if (!(c.epsilon > 0.0)) errors.push_back("parameters.epsilon: nonpositive epsilon");
    if (!(c.host_density >= 0.0)) errors.push_back("initial.host_density: must be nonnegative");
    if (!(c.vector_density >= 0.0)) errors.push_back("initial.vector_density: must be nonnegative");

    const auto steps = [&](double span, const char* what) -> long {
        try {
            return whole_steps(span, c.dt, what);
        } catch (const Error& e) {
            errors.push_back(std::string("solver: ") + e.what());
            return -1;
        }
    };
    if (!(c.dt > 0.0)) {
        errors.push_back("solver.dt: must be positive");
    } else {
        const long total = steps(c.t_end, "t_end");
        const long cadence = steps(c.cadence, "cadence");
        if (total > 0 && cadence > 0 && total % cadence != 0) errors.push_back("solver: cadence does not divide t_end");
        if (c.impulse_period) {
            if (!(*c.impulse_period > 0.0)) {
                errors.push_back("impulse.period: must be positive");
            } else {
                try {
                    whole_steps(*c.impulse_period, c.dt, "impulse period");
                } catch (const Error&) {
                    errors.push_back("impulse.period: dt does not divide the impulse period");
                }
            }
        }
        if (c.gsa) {
            for (double t : c.gsa->times) {
                if (t < 0.0 || t > c.t_end * (1 + 1e-12)) {
                    errors.push_back("gsa.times: time " + format_time(t) + " outside [0, t_end]");
                    continue;
                }
                const double k = t / c.cadence;
                if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
                    errors.push_back("gsa.times: time " + format_time(t) + " is not a snapshot time");
                }
            }
        }
    }

    if (c.gsa) {
        const GsaSpec& g = *c.gsa;
        if (g.m < 2) errors.push_back("gsa.M: must be at least 2");
        if (g.ranges.empty()) errors.push_back("gsa.ranges: at least one parameter range is required");
        for (const ParameterRange& r : g.ranges) {
            if (!kParameterNames.count(r.name)) errors.push_back("gsa.ranges." + r.name + ": unknown parameter");
            if (!(r.low < r.high)) errors.push_back("gsa.ranges." + r.name + ": low must be below high");
            if (r.name == "D" && !(r.low > 0.0)) errors.push_back("gsa.ranges.D: nonpositive diffusion");
            if (r.name == "epsilon" && !(r.low > 0.0)) errors.push_back("gsa.ranges.epsilon: nonpositive epsilon");
            if ((r.name == "beta_v" || r.name == "beta_h") && !(r.low >= 0.0)) {
                errors.push_back("gsa.ranges." + r.name + ": negative contact rate");
            }
        }
        if (g.times.empty()) errors.push_back("gsa.times: at least one output time is required");
        if (g.map_points < 1) errors.push_back("gsa.map_points: must be positive");
        if (g.heatmap_nx < 1 || g.heatmap_ny < 1) errors.push_back("gsa.heatmap: resolution must be positive");
    }
    if (c.transect.points < 2) errors.push_back("transect.points: must be at least 2");
    if (c.transect.classes < 1) errors.push_back("transect.classes: must be positive");
    if (c.spectral.potential != "constant" && c.spectral.potential != "initial_infection") {
        errors.push_back("spectral.potential: expected \"constant\" or \"initial_infection\"");
    } else if (c.spectral.potential == "constant" && !(c.spectral.value >= 0.0)) {
        errors.push_back("spectral.value: potential must be nonnegative");
    }

    // Geometry is cheap to build; doing it here surfaces domain problems before any compute.
    const DomainSpec& d = c.domain;
    if ((d.kind == "polygon" && d.rings.empty()) || d.kind == "ascii") {
        if (d.path.empty()) {
            errors.push_back("domain.path: required for kind " + d.kind);
            return;
        }
        if (!std::filesystem::exists(resolve(c.base_dir, d.path))) {
            errors.push_back("domain.path: file not found: " + d.path);
            return;
        }
    }
    if (d.kind != "ascii" && !(d.cell_size > 0.0)) {
        errors.push_back("domain.cell_size: must be positive");
        return;
    }
    try {
        const auto domain = make_domain(d, c.base_dir);
        for (std::size_t k = 0; k < c.introductions.size(); ++k) {
            if (!domain->locate(c.introductions[k].location)) {
                errors.push_back("initial.introductions[" + std::to_string(k) + "]: introduction point outside domain");
            }
        }
    } catch (const Error& e) {
        errors.push_back(std::string("domain: ") + e.what());
    }
}

} // namespace

ConfigValidationError::ConfigValidationError(std::vector<std::string> errors)
    : ConfigError(join_errors(errors)), errors_(std::move(errors)) {}

bool RunConfig::operator==(const RunConfig& o) const {
    return schema == o.schema && seed == o.seed && output_dir == o.output_dir && domain == o.domain &&
           beta_v == o.beta_v && beta_h == o.beta_h && diffusion == o.diffusion && epsilon == o.epsilon &&
           formulation == o.formulation && host_density == o.host_density && vector_density == o.vector_density &&
           introductions == o.introductions && dt == o.dt && t_end == o.t_end && cadence == o.cadence &&
           scheme == o.scheme && stages == o.stages && impulse_period == o.impulse_period && gsa == o.gsa && transect == o.transect &&
           spectral == o.spectral;
}

RunConfig parse_config_text(const std::string& text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigValidationError({std::string("malformed JSON: ") + e.what()});
    }
    std::vector<std::string> errors;
    RunConfig c;
    c.base_dir = base_dir;
    const Reader top(root, "", errors);
    top.allow({"schema", "seed", "output_dir", "domain", "parameters", "initial", "solver", "impulse", "gsa",
               "transect", "spectral"});
    if (!top.is_object()) throw ConfigValidationError(errors);

    c.schema = static_cast<int>(top.integer("schema", 0, true));
    if (top.has("schema") && c.schema != kConfigSchema) {
        errors.push_back("schema: unsupported version " + std::to_string(c.schema) + " (expected " +
                         std::to_string(kConfigSchema) + ")");
    }
    const long seed = top.integer("seed", 0);
    if (seed < 0) errors.push_back("seed: must be nonnegative");
    c.seed = static_cast<std::uint64_t>(std::max(0L, seed));
    c.output_dir = top.text("output_dir", c.output_dir);

    {
        const Reader d = top.child("domain", true);
        d.allow({"kind", "cell_size", "width", "height", "origin", "path", "rings", "name"});
        c.domain.kind = d.text("kind", c.domain.kind, true);
        c.domain.cell_size = d.number("cell_size", c.domain.cell_size, c.domain.kind != "ascii");
        c.domain.width = d.number("width", c.domain.width);
        c.domain.height = d.number("height", c.domain.height);
        c.domain.origin = d.point("origin").value_or(Point{});
        c.domain.path = d.text("path", "");
        c.domain.name = d.text("name", c.domain.name);
        if (const json* rings = d.get("rings", false)) c.domain.rings = read_rings(*rings, d.where("rings"), errors);
        static const std::set<std::string> kinds{"rectangle", "polygon", "ascii", "builtin"};
        if (!kinds.count(c.domain.kind)) errors.push_back("domain.kind: unknown kind \"" + c.domain.kind + "\"");
        if (c.domain.kind == "builtin" && c.domain.name != "mediterranean_arc") {
            errors.push_back("domain.name: unknown builtin domain \"" + c.domain.name + "\"");
        }
        if (c.domain.kind == "rectangle" && !(c.domain.width > 0.0 && c.domain.height > 0.0)) {
            errors.push_back("domain: rectangle width and height must be positive");
        }
    }
    {
        const Reader p = top.child("parameters", true);
        p.allow({"beta_v", "beta_h", "D", "epsilon", "formulation"});
        c.beta_v = p.number("beta_v", 0.0, true);
        c.beta_h = p.number("beta_h", 0.0, true);
        c.diffusion = p.number("D", 1.0, true);
        c.epsilon = p.number("epsilon", 1.0, true);
        const std::string f = p.text("formulation", "nonfickian");
        if (f == "fickian") {
            c.formulation = Formulation::kFickian;
        } else if (f != "nonfickian") {
            p.error("formulation", "expected \"nonfickian\" or \"fickian\"");
        }
    }
    {
        const Reader i = top.child("initial", true);
        i.allow({"host_density", "vector_density", "introductions"});
        c.host_density = i.number("host_density", 0.0, true);
        c.vector_density = i.number("vector_density", 0.0, true);
        if (const json* list = i.get("introductions", false)) {
            if (!list->is_array()) {
                i.error("introductions", "expected a list");
            } else {
                for (std::size_t k = 0; k < list->size(); ++k) {
                    const Reader r((*list)[k], i.where("introductions") + "[" + std::to_string(k) + "]", errors);
                    r.allow({"compartment", "at", "amount"});
                    Introduction intro;
                    const std::string comp = r.text("compartment", "I_v");
                    try {
                        intro.compartment = parse_compartment(comp);
                    } catch (const Error&) {
                        r.error("compartment", "unknown compartment \"" + comp + "\"");
                    }
                    intro.location = r.point("at", true).value_or(Point{});
                    intro.amount = r.number("amount", 1.0);
                    if (!(intro.amount >= 0.0)) r.error("amount", "must be nonnegative");
                    c.introductions.push_back(intro);
                }
            }
        }
    }
    {
        const Reader s = top.child("solver", true);
        s.allow({"dt", "t_end", "cadence", "scheme", "stages"});
        c.dt = s.number("dt", c.dt);
        c.t_end = s.number("t_end", c.t_end, true);
        c.cadence = s.number("cadence", c.cadence);
        const std::string scheme = s.text("scheme", "strang");
        if (scheme == "lie") {
            c.scheme = SplittingScheme::kLie;
        } else if (scheme != "strang") {
            s.error("scheme", "expected \"strang\" or \"lie\"");
        }
        const std::string stages = s.text("stages", "implicit_euler");
        if (stages == "trapezoidal") {
            c.stages = StageIntegrator::kTrapezoidal;
        } else if (stages != "implicit_euler") {
            s.error("stages", "expected \"implicit_euler\" or \"trapezoidal\"");
        }
    }
    if (top.has("impulse")) {
        const Reader im = top.child("impulse");
        im.allow({"period"});
        c.impulse_period = im.number("period", 1.0);
    }
    if (top.has("gsa")) {
        const Reader g = top.child("gsa");
        g.allow({"M", "ranges", "compartments", "times", "map_points", "cache_dir", "heatmap"});
        GsaSpec spec;
        spec.m = static_cast<int>(g.integer("M", spec.m, true));
        if (const json* ranges = g.get("ranges", true)) {
            if (!ranges->is_object()) {
                g.error("ranges", "expected an object of name: [low, high]");
            } else {
                for (const auto& [name, value] : ranges->items()) {
                    if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number()) {
                        g.error("ranges." + name, "expected [low, high]");
                        continue;
                    }
                    spec.ranges.push_back({name, value[0].get<double>(), value[1].get<double>()});
                }
            }
        }
        spec.compartments = g.compartments("compartments", spec.compartments);
        if (const json* times = g.get("times", true)) {
            if (!times->is_array()) {
                g.error("times", "expected a list of numbers");
            } else {
                for (const auto& t : *times) {
                    if (t.is_number()) {
                        spec.times.push_back(t.get<double>());
                    } else {
                        g.error("times", "expected a list of numbers");
                    }
                }
            }
        }
        spec.map_points = static_cast<int>(g.integer("map_points", spec.map_points));
        spec.cache_dir = g.text("cache_dir", "");
        if (g.has("heatmap")) {
            const Reader h = g.child("heatmap");
            h.allow({"nx", "ny"});
            spec.heatmap_nx = static_cast<int>(h.integer("nx", spec.heatmap_nx));
            spec.heatmap_ny = static_cast<int>(h.integer("ny", spec.heatmap_ny));
        }
        c.gsa = spec;
    }
    if (top.has("transect")) {
        const Reader t = top.child("transect");
        t.allow({"start", "direction", "points", "classes", "compartments"});
        c.transect.start = t.point("start");
        c.transect.direction = t.point("direction").value_or(c.transect.direction);
        c.transect.points = static_cast<int>(t.integer("points", c.transect.points));
        c.transect.classes = static_cast<int>(t.integer("classes", c.transect.classes));
        c.transect.compartments = t.compartments("compartments", c.transect.compartments);
    }
    if (top.has("spectral")) {
        const Reader s = top.child("spectral");
        s.allow({"potential", "value"});
        c.spectral.potential = s.text("potential", c.spectral.potential);
        c.spectral.value = s.number("value", 0.0);
    }

    validate(c, errors);
    if (!errors.empty()) throw ConfigValidationError(errors);
    return c;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigValidationError({"cannot read config file: " + path});
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    return parse_config_text(buffer.str(), parent.empty() ? "." : parent.string());
}

std::string serialize_config(const RunConfig& c) {
    json root;
    root["schema"] = c.schema;
    root["seed"] = c.seed;
    root["output_dir"] = c.output_dir;

    json d;
    d["kind"] = c.domain.kind;
    if (c.domain.kind != "ascii") d["cell_size"] = c.domain.cell_size;
    if (c.domain.kind == "rectangle") {
        d["width"] = c.domain.width;
        d["height"] = c.domain.height;
        d["origin"] = {c.domain.origin.x, c.domain.origin.y};
    }
    if (!c.domain.path.empty()) d["path"] = c.domain.path;
    if (!c.domain.rings.empty()) {
        json rings = json::array();
        for (const Ring& r : c.domain.rings) {
            json ring = json::array();
            for (const Point& p : r) ring.push_back({p.x, p.y});
            rings.push_back(ring);
        }
        d["rings"] = rings;
    }
    if (c.domain.kind == "builtin") d["name"] = c.domain.name;
    root["domain"] = d;

    root["parameters"] = {{"beta_v", c.beta_v},
                          {"beta_h", c.beta_h},
                          {"D", c.diffusion},
                          {"epsilon", c.epsilon},
                          {"formulation", formulation_name(c.formulation)}};

    json intros = json::array();
    for (const Introduction& i : c.introductions) {
        intros.push_back({{"compartment", compartment_name(i.compartment)},
                          {"at", {i.location.x, i.location.y}},
                          {"amount", i.amount}});
    }
    root["initial"] = {{"host_density", c.host_density}, {"vector_density", c.vector_density}, {"introductions", intros}};
    root["solver"] = {{"dt", c.dt}, {"t_end", c.t_end}, {"cadence", c.cadence}, {"scheme", scheme_name(c.scheme)},
                      {"stages", stage_name(c.stages)}};
    if (c.impulse_period) root["impulse"] = {{"period", *c.impulse_period}};

    const auto names = [](const std::vector<Compartment>& cs) {
        json list = json::array();
        for (Compartment x : cs) list.push_back(compartment_name(x));
        return list;
    };
    if (c.gsa) {
        const GsaSpec& g = *c.gsa;
        json ranges = json::object();
        for (const ParameterRange& r : g.ranges) ranges[r.name] = {r.low, r.high};
        root["gsa"] = {{"M", g.m},
                       {"ranges", ranges},
                       {"compartments", names(g.compartments)},
                       {"times", g.times},
                       {"map_points", g.map_points},
                       {"cache_dir", g.cache_dir},
                       {"heatmap", {{"nx", g.heatmap_nx}, {"ny", g.heatmap_ny}}}};
    }
    json t = {{"direction", {c.transect.direction.x, c.transect.direction.y}},
              {"points", c.transect.points},
              {"classes", c.transect.classes},
              {"compartments", names(c.transect.compartments)}};
    if (c.transect.start) t["start"] = {c.transect.start->x, c.transect.start->y};
    root["transect"] = t;
    root["spectral"] = {{"potential", c.spectral.potential}, {"value", c.spectral.value}};
    return root.dump(2) + "\n";
}

std::string config_hash(const RunConfig& config) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(serialize_config(config))));
    return buf;
}

std::shared_ptr<const SpatialDomain> make_domain(const DomainSpec& spec, const std::string& base_dir) {
    if (spec.kind == "rectangle") {
        const Point o = spec.origin;
        const Ring r{{o.x, o.y}, {o.x + spec.width, o.y}, {o.x + spec.width, o.y + spec.height}, {o.x, o.y + spec.height}};
        return std::make_shared<const SpatialDomain>(build_domain(std::vector<Ring>{r}, spec.cell_size));
    }
    if (spec.kind == "builtin") {
        return std::make_shared<const SpatialDomain>(
            build_domain(std::vector<Ring>{mediterranean_arc()}, spec.cell_size));
    }
    if (spec.kind == "polygon") {
        if (!spec.rings.empty()) {
            return std::make_shared<const SpatialDomain>(build_domain(spec.rings, spec.cell_size));
        }
        std::ifstream in(resolve(base_dir, spec.path));
        if (!in) throw ConfigError("cannot read polygon file: " + spec.path);
        return std::make_shared<const SpatialDomain>(build_domain(parse_polygon_list(in), spec.cell_size));
    }
    if (spec.kind == "ascii") {
        std::ifstream in(resolve(base_dir, spec.path));
        if (!in) throw ConfigError("cannot read mask file: " + spec.path);
        return std::make_shared<const SpatialDomain>(build_domain(parse_ascii_mask(in)));
    }
    throw ConfigError("unknown domain kind \"" + spec.kind + "\"");
}

ModelParams make_params(const RunConfig& c) {
    ModelParams p;
    p.beta_v = c.beta_v;
    p.beta_h = c.beta_h;
    p.diffusion = c.diffusion;
    p.epsilon = c.epsilon;
    p.formulation = c.formulation;
    return p;
}

ModelParams with_parameters(ModelParams base, const std::vector<ParameterRange>& names, std::span<const double> values) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string& n = names[i].name;
        if (n == "beta_v") {
            base.beta_v = values[i];
        } else if (n == "beta_h") {
            base.beta_h = values[i];
        } else if (n == "D") {
            base.diffusion = values[i];
        } else if (n == "epsilon") {
            base.epsilon = values[i];
        } else {
            throw ConfigError("unknown parameter \"" + n + "\"");
        }
    }
    return base;
}

SimulationConfig make_simulation(const RunConfig& c, std::shared_ptr<const SpatialDomain> domain) {
    SimulationConfig s;
    s.params = make_params(c);
    s.initial = make_initial_state(*domain, c.host_density, c.vector_density, c.introductions);
    s.dt = c.dt;
    s.t_end = c.t_end;
    s.cadence = c.cadence;
    s.scheme = c.scheme;
    s.stages = c.stages;
    if (c.impulse_period) {
        s.impulse = ImpulseSchedule{*c.impulse_period, std::vector<double>(domain->size(), c.vector_density)};
    }
    s.domain = std::move(domain);
    return s;
}

} // namespace vbsim
