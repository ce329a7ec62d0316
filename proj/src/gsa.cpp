#include "vbsim/gsa.hpp"

#include "vbsim/error.hpp"
#include "vbsim/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace vbsim {

Eigen::MatrixXd lhs_sample(int k, int m, std::uint64_t seed) {
    if (k < 1 || m < 2) {
        throw AnalysisError("lhs_sample needs K >= 1 and M >= 2");
    }
    Rng rng(seed);
    Eigen::MatrixXd x(m, k);
    std::vector<int> strata(static_cast<std::size_t>(m));
    for (int col = 0; col < k; ++col) {
        std::iota(strata.begin(), strata.end(), 0);
        // Fisher-Yates
        for (int i = m - 1; i > 0; --i) {
            const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
            std::swap(strata[i], strata[j]);
        }
        for (int row = 0; row < m; ++row) {
            x(row, col) = (strata[row] + rng.uniform()) / m;
        }
    }
    return x;
}

Eigen::MatrixXd decorrelate_columns(Eigen::MatrixXd x, int passes) {
    const Eigen::Index m = x.rows();
    const Eigen::Index n = x.cols();
    if (n < 2 || m <= n) return x;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::vector<double> values(static_cast<std::size_t>(m));
    for (int pass = 0; pass < passes; ++pass) {
        const Eigen::MatrixXd centred = x.rowwise() - x.colwise().mean();
        Eigen::MatrixXd corr = centred.transpose() * centred;
        const Eigen::VectorXd inv_sd = corr.diagonal().cwiseSqrt().cwiseInverse();
        corr = inv_sd.asDiagonal() * corr * inv_sd.asDiagonal();
        const Eigen::LLT<Eigen::MatrixXd> llt(corr);
        if (llt.info() != Eigen::Success) return x;
        const Eigen::MatrixXd white = llt.matrixL().solve(centred.transpose()).transpose();
        for (Eigen::Index c = 0; c < n; ++c) {
            std::iota(order.begin(), order.end(), Eigen::Index{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](Eigen::Index a, Eigen::Index b) { return white(a, c) < white(b, c); });
            for (Eigen::Index r = 0; r < m; ++r) values[static_cast<std::size_t>(r)] = x(r, c);
            std::sort(values.begin(), values.end());
            for (Eigen::Index r = 0; r < m; ++r) x(order[static_cast<std::size_t>(r)], c) = values[static_cast<std::size_t>(r)];
        }
    }
    return x;
}

std::string block_name(DesignBlock b) {
    switch (b) {
    case DesignBlock::kA: return "A";
    case DesignBlock::kAB: return "A_B";
    case DesignBlock::kBA: return "B_A";
    }
    return "?";
}

std::size_t GsaDesign::row_index(DesignBlock block, int param, int sample) const {
    const auto mm = static_cast<std::size_t>(m);
    switch (block) {
    case DesignBlock::kA: return static_cast<std::size_t>(sample);
    case DesignBlock::kAB: return mm * (1 + static_cast<std::size_t>(param)) + sample;
    case DesignBlock::kBA: return mm * (1 + static_cast<std::size_t>(k + param)) + sample;
    }
    return 0;
}

GsaDesign build_design(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::vector<ParameterRange> ranges) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || static_cast<std::size_t>(a.cols()) != ranges.size() ||
        a.rows() < 1) {
        throw AnalysisError("design shape error");
    }
    for (const auto* mat : {&a, &b}) {
        if ((mat->array() < 0.0).any() || (mat->array() > 1.0).any()) {
            throw AnalysisError("design shape error: unit samples must lie in [0,1]");
        }
    }
    GsaDesign d;
    d.k = static_cast<int>(a.cols());
    d.m = static_cast<int>(a.rows());
    d.ranges = std::move(ranges);
    d.a = a;
    d.b = b;
    auto scaled = [&](const Eigen::RowVectorXd& unit) {
        std::vector<double> v(static_cast<std::size_t>(d.k));
        for (int c = 0; c < d.k; ++c) v[c] = d.ranges[c].scale(unit[c]);
        return v;
    };
    d.rows.reserve(static_cast<std::size_t>(d.m) * (2 * d.k + 1));
    for (int j = 0; j < d.m; ++j) {
        d.rows.push_back({DesignBlock::kA, -1, j, scaled(a.row(j))});
    }
    for (int i = 0; i < d.k; ++i) {
        for (int j = 0; j < d.m; ++j) {
            Eigen::RowVectorXd r = a.row(j);
            r[i] = b(j, i);
            d.rows.push_back({DesignBlock::kAB, i, j, scaled(r)});
        }
    }
    for (int i = 0; i < d.k; ++i) {
        for (int j = 0; j < d.m; ++j) {
            Eigen::RowVectorXd r = b.row(j);
            r[i] = a(j, i);
            d.rows.push_back({DesignBlock::kBA, i, j, scaled(r)});
        }
    }
    return d;
}

GsaDesign make_design(std::vector<ParameterRange> ranges, int m, std::uint64_t seed) {
    const int k = static_cast<int>(ranges.size());
    // A and B come from one 2K-column hypercube so that the pairing step
    // also removes spurious correlation between A and B columns.
    const Eigen::MatrixXd ab = decorrelate_columns(lhs_sample(2 * k, m, derive_seed(seed, "gsa/AB")));
    GsaDesign d = build_design(ab.leftCols(k), ab.rightCols(k), std::move(ranges));
    d.seed = seed;
    return d;
}

std::string status_name(IndexStatus s) {
    switch (s) {
    case IndexStatus::kOk: return "ok";
    case IndexStatus::kDegenerate: return "degenerate variance";
    case IndexStatus::kMissing: return "missing";
    }
    return "?";
}

double SobolIndices::pi(std::size_t i) const { return std::clamp(pi_raw.at(i), 0.0, 1.0); }
double SobolIndices::ti(std::size_t i) const { return std::clamp(ti_raw.at(i), 0.0, 1.0); }

double closed_index(std::span<const double> y, std::span<const double> y_shared) {
    const auto m = static_cast<double>(y.size());
    double mean = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) mean += 0.5 * (y[j] + y_shared[j]);
    mean /= m;
    double cross = 0.0, square = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double u = y[j] - mean;
        const double v = y_shared[j] - mean;
        cross += u * v;
        square += 0.5 * (u * u + v * v);
    }
    return square > 0.0 ? cross / square : 0.0;
}

SobolIndices estimate_indices(std::span<const double> y_a, const std::vector<std::vector<double>>& y_ab,
                              const std::vector<std::vector<double>>& y_ba) {
    if (y_ab.size() != y_ba.size()) {
        throw AnalysisError("design shape error: substituted blocks differ in count");
    }
    for (const auto* blocks : {&y_ab, &y_ba}) {
        for (const auto& y : *blocks) {
            if (y.size() != y_a.size()) throw AnalysisError("design shape error: output length mismatch");
        }
    }
    SobolIndices out;
    const auto m = static_cast<double>(y_a.size());
    double magnitude = 0.0;
    for (double v : y_a) {
        out.mean += v;
        magnitude = std::max(magnitude, std::abs(v));
    }
    out.mean /= m;
    for (double v : y_a) out.variance += (v - out.mean) * (v - out.mean);
    out.variance /= m;
    const double floor = 1e-12 * magnitude;
    if (!(out.variance > floor * floor)) {
        out.status = IndexStatus::kDegenerate;
        return out;
    }
    const std::size_t k = y_ab.size();
    // Block b takes column c from B when from_b[b][c]; block 0 is A, then
    // A_B^(i), then B_A^(i).
    std::vector<std::span<const double>> blocks{y_a};
    std::vector<std::vector<bool>> from_b(1, std::vector<bool>(k, false));
    for (std::size_t i = 0; i < k; ++i) {
        blocks.emplace_back(y_ab[i]);
        from_b.emplace_back(k, false);
        from_b.back()[i] = true;
    }
    for (std::size_t i = 0; i < k; ++i) {
        blocks.emplace_back(y_ba[i]);
        from_b.emplace_back(k, true);
        from_b.back()[i] = false;
    }
    // Every pair of blocks sharing exactly {i} estimates PI_i, every pair
    // sharing all columns but i estimates 1 - TI_i; average them all.
    std::vector<double> pi_sum(k, 0.0), ti_sum(k, 0.0);
    std::vector<int> pi_count(k, 0), ti_count(k, 0);
    for (std::size_t p = 0; p < blocks.size(); ++p) {
        for (std::size_t q = p + 1; q < blocks.size(); ++q) {
            std::size_t shared = 0;
            for (std::size_t c = 0; c < k; ++c) shared += from_b[p][c] == from_b[q][c] ? 1 : 0;
            if (shared != 1 && shared + 1 != k) continue;
            const double index = closed_index(blocks[p], blocks[q]);
            for (std::size_t i = 0; i < k; ++i) {
                const bool has_i = from_b[p][i] == from_b[q][i];
                if (shared == 1 && has_i) {
                    pi_sum[i] += index;
                    ++pi_count[i];
                }
                if (shared + 1 == k && !has_i) {
                    ti_sum[i] += 1.0 - index;
                    ++ti_count[i];
                }
            }
        }
    }
    out.pi_raw.resize(k);
    out.ti_raw.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.pi_raw[i] = pi_sum[i] / pi_count[i];
        out.ti_raw[i] = ti_sum[i] / ti_count[i];
    }
    return out;
}

std::vector<double> extract_outputs(const Trajectory& trajectory, const std::vector<OutputPoint>& points) {
    std::vector<double> out;
    out.reserve(points.size());
    std::size_t last = 0;
    for (const OutputPoint& p : points) {
        // Points are usually grouped by time; try the previous match first.
        std::size_t s = last;
        const auto matches = [&](std::size_t idx) {
            return std::abs(trajectory.times[idx] - p.time) <= 1e-9 * std::max(1.0, std::abs(p.time));
        };
        if (s >= trajectory.times.size() || !matches(s)) {
            s = 0;
            while (s < trajectory.times.size() && !matches(s)) ++s;
            if (s == trajectory.times.size()) {
                throw AnalysisError("output time " + std::to_string(p.time) + " is not a snapshot time");
            }
        }
        last = s;
        const auto& values = field(trajectory.snapshots[s], p.compartment);
        if (p.cell < 0 || static_cast<std::size_t>(p.cell) >= values.size()) {
            throw AnalysisError("output cell out of range");
        }
        out.push_back(values[static_cast<std::size_t>(p.cell)]);
    }
    return out;
}

std::string cache_file_name(const std::string& cache_key, std::span<const double> parameters,
                            const std::vector<OutputPoint>& points) {
    std::string text = cache_key;
    char buf[64];
    for (double v : parameters) {
        std::snprintf(buf, sizeof buf, "|%.17g", v);
        text += buf;
    }
    std::uint64_t h = fnv1a(text);
    for (const OutputPoint& p : points) {
        std::snprintf(buf, sizeof buf, "|%d:%.17g:%d", static_cast<int>(p.compartment), p.time, p.cell);
        h = fnv1a(buf, h);
    }
    std::snprintf(buf, sizeof buf, "row_%016llx.csv", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

bool load_cached(const std::filesystem::path& path, std::size_t expected, std::vector<double>& values) {
    std::ifstream in(path);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line) || line != "index,value") return false;
    values.clear();
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) return false;
        values.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
    }
    return values.size() == expected;
}

void store_cached(const std::filesystem::path& path, const std::vector<double>& values) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        out << "index,value\n";
        char buf[64];
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, values[i]);
            out << buf;
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

GsaRun spatiotemporal_gsa(const Runner& runner, const GsaDesign& design, const std::vector<OutputPoint>& points,
                          const GsaOptions& options) {
    if (points.empty()) {
        throw AnalysisError("output spec is empty");
    }
    const std::size_t rows = design.rows.size();
    std::vector<std::size_t> order = options.evaluation_order;
    if (order.empty()) {
        order.resize(rows);
        std::iota(order.begin(), order.end(), 0);
    }
    if (order.size() != rows) {
        throw AnalysisError("evaluation order does not cover the design");
    }
    if (!options.cache_dir.empty()) {
        std::filesystem::create_directories(options.cache_dir);
    }

    GsaRun run;
    run.outputs.assign(rows, {});
    run.row_errors.assign(rows, {});
    std::vector<unsigned char> simulated(rows, 0);

    const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, options.workers))
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const std::size_t r = order[static_cast<std::size_t>(k)];
        const DesignRow& row = design.rows[r];
        try {
            std::filesystem::path cached;
            if (!options.cache_dir.empty()) {
                cached = std::filesystem::path(options.cache_dir) / cache_file_name(options.cache_key, row.values, points);
                if (load_cached(cached, points.size(), run.outputs[r])) {
                    continue;
                }
            }
            run.outputs[r] = extract_outputs(runner(row.values), points);
            simulated[r] = 1;
            if (!cached.empty()) {
                store_cached(cached, run.outputs[r]);
            }
        } catch (const std::exception& e) {
            run.row_errors[r] = e.what();
            run.outputs[r].clear();
        }
    }
    for (std::size_t r = 0; r < rows; ++r) {
        if (simulated[r]) {
            ++run.simulations;
        } else if (run.row_errors[r].empty()) {
            ++run.cache_hits;
        }
    }
    run.results = analyze_outputs(design, run.outputs, run.row_errors, points);
    return run;
}

std::vector<SensitivityResult> analyze_outputs(const GsaDesign& design, const std::vector<std::vector<double>>& outputs,
                                               const std::vector<std::string>& row_errors,
                                               const std::vector<OutputPoint>& points) {
    const auto m = static_cast<std::size_t>(design.m);
    const auto k = static_cast<std::size_t>(design.k);
    std::vector<SensitivityResult> results;
    results.reserve(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        SensitivityResult res{points[p], {}};
        bool complete = true;
        auto column = [&](DesignBlock block, int param) {
            std::vector<double> y(m);
            for (std::size_t j = 0; j < m; ++j) {
                const std::size_t r = design.row_index(block, param, static_cast<int>(j));
                if (!row_errors[r].empty() || outputs[r].size() <= p) {
                    complete = false;
                    y[j] = 0.0;
                } else {
                    y[j] = outputs[r][p];
                }
            }
            return y;
        };
        const std::vector<double> y_a = column(DesignBlock::kA, -1);
        std::vector<std::vector<double>> y_ab, y_ba;
        for (std::size_t i = 0; i < k; ++i) {
            y_ab.push_back(column(DesignBlock::kAB, static_cast<int>(i)));
            y_ba.push_back(column(DesignBlock::kBA, static_cast<int>(i)));
        }
        if (complete) {
            res.indices = estimate_indices(y_a, y_ab, y_ba);
        } else {
            res.indices.status = IndexStatus::kMissing;
        }
        results.push_back(std::move(res));
    }
    return results;
}

Transect transect_from_points(const SpatialDomain& domain, const std::vector<Point>& points) {
    Transect t;
    for (const Point& p : points) {
        const auto cell = domain.locate(p);
        if (!cell) {
            throw GeometryError("transect point outside domain");
        }
        t.points.push_back(p);
        t.cells.push_back(*cell);
    }
    return t;
}

Transect make_transect(const SpatialDomain& domain, Point start, Point direction, int count) {
    if (count < 2) {
        throw GeometryError("transect needs at least 2 points");
    }
    const double norm = std::hypot(direction.x, direction.y);
    if (!(norm > 0.0)) {
        throw GeometryError("transect direction must be nonzero");
    }
    const Point u{direction.x / norm, direction.y / norm};
    if (!domain.locate(start)) {
        throw GeometryError("transect point outside domain");
    }
    const double step = 0.25 * domain.cell_size();
    double length = 0.0;
    while (domain.locate({start.x + (length + step) * u.x, start.y + (length + step) * u.y})) {
        length += step;
    }
    std::vector<Point> pts;
    for (int k = 0; k < count; ++k) {
        const double s = length * k / (count - 1);
        pts.push_back({start.x + s * u.x, start.y + s * u.y});
    }
    return transect_from_points(domain, pts);
}

std::vector<std::vector<double>> extract_transect(const Trajectory& trajectory, const Transect& transect,
                                                  Compartment compartment) {
    std::vector<std::vector<double>> series(transect.cells.size());
    for (std::size_t p = 0; p < transect.cells.size(); ++p) {
        const auto cell = static_cast<std::size_t>(transect.cells[p]);
        for (const StateFields& s : trajectory.snapshots) {
            const auto& values = field(s, compartment);
            if (cell >= values.size()) {
                throw GeometryError("transect point outside domain");
            }
            series[p].push_back(values[cell]);
        }
    }
    return series;
}

ClassMeans class_means(std::span<const double> parameter_values, const ParameterRange& range,
                       const std::vector<std::vector<double>>& outputs, int count) {
    if (count < 1) {
        throw AnalysisError("class count must be positive");
    }
    if (parameter_values.size() != outputs.size()) {
        throw AnalysisError("one output vector per run is required");
    }
    ClassMeans cm;
    const double width = (range.high - range.low) / count;
    for (int c = 0; c <= count; ++c) cm.boundaries.push_back(c == count ? range.high : range.low + c * width);
    const std::size_t len = outputs.empty() ? 0 : outputs.front().size();
    cm.counts.assign(static_cast<std::size_t>(count), 0);
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(count), std::vector<double>(len, 0.0));
    for (std::size_t r = 0; r < outputs.size(); ++r) {
        if (outputs[r].size() != len) {
            throw AnalysisError("output vectors differ in length");
        }
        int c = width > 0.0 ? static_cast<int>(std::floor((parameter_values[r] - range.low) / width)) : 0;
        c = std::clamp(c, 0, count - 1);
        ++cm.counts[static_cast<std::size_t>(c)];
        for (std::size_t s = 0; s < len; ++s) sums[static_cast<std::size_t>(c)][s] += outputs[r][s];
    }
    cm.means.resize(static_cast<std::size_t>(count));
    for (std::size_t c = 0; c < sums.size(); ++c) {
        cm.means[c].resize(len);
        for (std::size_t s = 0; s < len; ++s) {
            cm.means[c][s] = cm.counts[c] > 0 ? sums[c][s] / static_cast<double>(cm.counts[c])
                                              : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return cm;
}

} // namespace vbsim
