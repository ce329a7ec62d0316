#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vbsim/geometry.hpp"
#include "vbsim/model.hpp"
#include "vbsim/scenarios.hpp"

namespace vbsim {

/// Latin hypercube sample of M points in [0,1]^K: every column holds exactly
/// one point in each stratum [j/M, (j+1)/M), jittered uniformly within it.
Eigen::MatrixXd lhs_sample(int k, int m, std::uint64_t seed);

/// Iman-Conover restricted pairing towards zero correlation: each pass
/// whitens the centred columns with the Cholesky factor of their sample
/// correlation and re-pairs every column's values to the whitened ranks.
/// Column value sets (and so the Latin hypercube strata) are unchanged.
/// Skipped when M <= columns or the correlation matrix is singular.
Eigen::MatrixXd decorrelate_columns(Eigen::MatrixXd x, int passes = 3);

struct ParameterRange {
    std::string name;
    double low = 0.0;
    double high = 1.0;

    double scale(double unit) const { return low + unit * (high - low); }
    bool operator==(const ParameterRange&) const = default;
};

/// Provenance of a design row.
///   kA:  row of A
///   kAB: row of A with column `param` taken from B
///   kBA: row of B with column `param` taken from A
enum class DesignBlock { kA, kAB, kBA };

std::string block_name(DesignBlock b);

struct DesignRow {
    DesignBlock block = DesignBlock::kA;
    int param = -1;     // substituted parameter, -1 for block A
    int sample = 0;     // row of A/B it derives from
    std::vector<double> values;  // scaled to the parameter ranges
};

/// M * (2K + 1) evaluation points: A, then the K blocks A_B^(i), then the K
/// blocks B_A^(i), each block M rows long.
struct GsaDesign {
    int k = 0;
    int m = 0;
    std::uint64_t seed = 0;
    std::vector<ParameterRange> ranges;
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
    std::vector<DesignRow> rows;

    std::size_t row_index(DesignBlock block, int param, int sample) const;
};

GsaDesign build_design(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::vector<ParameterRange> ranges);
/// A and B are the two halves of one decorrelated 2K-column Latin hypercube
/// sample derived from `seed`.
GsaDesign make_design(std::vector<ParameterRange> ranges, int m, std::uint64_t seed);

enum class IndexStatus { kOk, kDegenerate, kMissing };
std::string status_name(IndexStatus s);

/// Principal (PI) and total (TI) Sobol indices for one scalar output.
struct SobolIndices {
    IndexStatus status = IndexStatus::kOk;
    double mean = 0.0;
    double variance = 0.0;
    std::vector<double> pi_raw;
    std::vector<double> ti_raw;

    double pi(std::size_t i) const;  // clamped to [0, 1]
    double ti(std::size_t i) const;
};

/// Correlation-type estimator on paired samples sharing a subset u of inputs:
/// returns the closed index of u. With y_A paired to y_{B_A^(i)} (sharing
/// only input i) this is PI_i; with y_A paired to y_{A_B^(i)} (sharing all
/// but i) it is the closed index of the complement and TI_i = 1 - that.
double closed_index(std::span<const double> y, std::span<const double> y_shared);

/// PI_i averages closed_index over every pair of design blocks that shares
/// exactly input i (for K = 3: (A, B_A^(i)), (A_B^(j), A_B^(l)) and
/// (B_A^(j), B_A^(l))); TI_i likewise over pairs sharing all inputs but i.
/// Status is kDegenerate ("degenerate variance") when the outputs have no
/// variance, in which case the indices are left empty.
SobolIndices estimate_indices(std::span<const double> y_a, const std::vector<std::vector<double>>& y_ab,
                              const std::vector<std::vector<double>>& y_ba);

/// One scalar model output: a compartment at a snapshot time in a cell.
struct OutputPoint {
    Compartment compartment = Compartment::kIh;
    double time = 0.0;
    int cell = 0;
};

struct SensitivityResult {
    OutputPoint point;
    SobolIndices indices;
};

/// Values of `points` read from the trajectory snapshots (times must match a snapshot).
std::vector<double> extract_outputs(const Trajectory& trajectory, const std::vector<OutputPoint>& points);

using Runner = std::function<Trajectory(std::span<const double> parameters)>;

struct GsaOptions {
    int workers = 1;
    /// Directory holding one CSV of raw outputs per design row; empty disables caching.
    std::string cache_dir;
    /// Identifies the scenario the runner simulates; part of each row's cache key.
    std::string cache_key;
    /// Order in which rows are handed to workers; empty means design order.
    std::vector<std::size_t> evaluation_order;
};

struct GsaRun {
    std::vector<std::vector<double>> outputs;  // [row][point]
    std::vector<std::string> row_errors;       // empty string when the row succeeded
    std::vector<SensitivityResult> results;    // one per output point
    std::size_t simulations = 0;               // rows actually simulated
    std::size_t cache_hits = 0;
};

/// Evaluates every design row (in parallel over `workers`) and estimates the
/// indices at every output point. The reduction is done in design order so
/// results do not depend on scheduling.
GsaRun spatiotemporal_gsa(const Runner& runner, const GsaDesign& design, const std::vector<OutputPoint>& points,
                          const GsaOptions& options = {});

/// Indices per output point from raw outputs; rows with an error make the point kMissing.
std::vector<SensitivityResult> analyze_outputs(const GsaDesign& design, const std::vector<std::vector<double>>& outputs,
                                               const std::vector<std::string>& row_errors,
                                               const std::vector<OutputPoint>& points);

std::string cache_file_name(const std::string& cache_key, std::span<const double> parameters,
                            const std::vector<OutputPoint>& points);

/// Ordered sample points along a ray from the introduction site.
struct Transect {
    std::vector<Point> points;
    std::vector<int> cells;
};

/// `count` points evenly spaced from `start` along `direction` up to the last
/// position still inside the domain. Throws GeometryError("transect point
/// outside domain") if an intermediate point leaves the domain.
Transect make_transect(const SpatialDomain& domain, Point start, Point direction, int count = 40);
Transect transect_from_points(const SpatialDomain& domain, const std::vector<Point>& points);

/// series[p][s]: compartment value at transect point p and snapshot s (nearest-cell sampling).
std::vector<std::vector<double>> extract_transect(const Trajectory& trajectory, const Transect& transect,
                                                  Compartment compartment);

struct ClassMeans {
    std::vector<double> boundaries;            // count + 1 edges, equal-length classes
    std::vector<std::size_t> counts;           // runs per class
    std::vector<std::vector<double>> means;    // [class][series entry]; NaN for empty classes
};

/// Groups runs by the equal-length sub-interval of `range` their parameter
/// value falls in and averages each run's output vector within the group.
ClassMeans class_means(std::span<const double> parameter_values, const ParameterRange& range,
                       const std::vector<std::vector<double>>& outputs, int count = 4);

} // namespace vbsim
