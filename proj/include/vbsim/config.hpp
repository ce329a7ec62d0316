#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vbsim/error.hpp"
#include "vbsim/geometry.hpp"
#include "vbsim/gsa.hpp"
#include "vbsim/model.hpp"
#include "vbsim/scenarios.hpp"

namespace vbsim {

inline constexpr int kConfigSchema = 1;

/// Raised by parse_config with every problem found, one per entry of errors().
class ConfigValidationError : public ConfigError {
public:
    explicit ConfigValidationError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct DomainSpec {
    std::string kind = "rectangle";  // rectangle | polygon | ascii | builtin
    double cell_size = 0.1;          // unused for ascii (taken from the file header)
    double width = 1.0;              // rectangle
    double height = 1.0;             // rectangle
    Point origin;                    // rectangle
    std::string path;                // polygon or ascii file, relative to the config file
    std::vector<Ring> rings;         // inline polygon rings
    std::string name = "mediterranean_arc";  // builtin

    bool operator==(const DomainSpec&) const = default;
};

struct GsaSpec {
    int m = 50;
    std::vector<ParameterRange> ranges;  // names from: beta_v, beta_h, D, epsilon
    std::vector<Compartment> compartments{Compartment::kIh, Compartment::kIv};
    std::vector<double> times;           // snapshot times analyzed
    int map_points = 600;                // cells sampled for the index maps
    std::string cache_dir;               // empty disables the output cache
    int heatmap_nx = 100;
    int heatmap_ny = 50;

    bool operator==(const GsaSpec&) const = default;
};

struct TransectSpec {
    std::optional<Point> start;  // defaults to the first introduction point
    Point direction{-1.0, 0.0};
    int points = 40;
    int classes = 4;
    std::vector<Compartment> compartments{Compartment::kIh, Compartment::kIv};

    bool operator==(const TransectSpec&) const = default;
};

struct SpectralSpec {
    /// "constant": potential equal to `value` everywhere;
    /// "initial_infection": i_h(0,x) N(x) beta_h.
    std::string potential = "initial_infection";
    double value = 0.0;

    bool operator==(const SpectralSpec&) const = default;
};

struct RunConfig {
    int schema = kConfigSchema;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    DomainSpec domain;

    double beta_v = 0.0;
    double beta_h = 0.0;
    double diffusion = 1.0;
    double epsilon = 1.0;
    Formulation formulation = Formulation::kNonFickian;

    double host_density = 0.0;
    double vector_density = 0.0;
    std::vector<Introduction> introductions;

    double dt = 0.01;
    double t_end = 1.0;
    double cadence = 1.0;
    SplittingScheme scheme = SplittingScheme::kStrang;
    StageIntegrator stages = StageIntegrator::kImplicitEuler;

    std::optional<double> impulse_period;  // set selects the impulsive model
    std::optional<GsaSpec> gsa;
    TransectSpec transect;
    SpectralSpec spectral;

    /// Directory relative file paths are resolved against; not serialized.
    std::string base_dir = ".";

    bool operator==(const RunConfig& other) const;
};

RunConfig parse_config(const std::string& path);
/// Parses and validates JSON text; every error is collected before throwing.
RunConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");
std::string serialize_config(const RunConfig& config);

/// Stable hash of the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& config);

std::shared_ptr<const SpatialDomain> make_domain(const DomainSpec& spec, const std::string& base_dir);

ModelParams make_params(const RunConfig& config);
/// Applies named parameter values (beta_v, beta_h, D, epsilon) on top of `base`.
ModelParams with_parameters(ModelParams base, const std::vector<ParameterRange>& names, std::span<const double> values);

SimulationConfig make_simulation(const RunConfig& config, std::shared_ptr<const SpatialDomain> domain);

} // namespace vbsim
