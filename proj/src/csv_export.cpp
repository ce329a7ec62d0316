#include "vbsim/csv_export.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace vbsim {

std::string format_number(double value) {
    if (std::isnan(value)) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

class Row {
public:
    explicit Row(std::ostream& out) : out_(out) {}
    ~Row() { out_ << '\n'; }
    Row& operator<<(double v) { return text(format_number(v)); }
    Row& operator<<(const std::string& s) { return text(s); }
    Row& operator<<(const char* s) { return text(s); }
    Row& operator<<(std::size_t v) { return text(std::to_string(v)); }
    Row& operator<<(int v) { return text(std::to_string(v)); }
    Row& operator<<(long v) { return text(std::to_string(v)); }

private:
    Row& text(const std::string& s) {
        if (!first_) out_ << ',';
        first_ = false;
        out_ << s;
        return *this;
    }
    std::ostream& out_;
    bool first_ = true;
};

} // namespace

void write_snapshots(std::ostream& out, const SpatialDomain& domain, const Trajectory& trajectory) {
    out << "t,x,y,S_h,E_h,I_h,S_v,I_v\n";
    for (std::size_t s = 0; s < trajectory.snapshots.size(); ++s) {
        const StateFields& st = trajectory.snapshots[s];
        for (std::size_t i = 0; i < st.size(); ++i) {
            const Point c = domain.center(static_cast<int>(i));
            Row(out) << trajectory.times[s] << c.x << c.y << st.sh[i] << st.eh[i] << st.ih[i] << st.sv[i] << st.iv[i];
        }
    }
}

void write_ledger(std::ostream& out, const Trajectory& trajectory) {
    out << "t,host_total,max_host_deviation,vector_integral,clamped_mass\n";
    for (std::size_t s = 0; s < trajectory.ledger.size(); ++s) {
        const LedgerEntry& e = trajectory.ledger[s];
        Row(out) << trajectory.times[s] << e.host_total << e.max_host_deviation << e.vector_integral << e.clamped_mass;
    }
}

void write_gsa_results(std::ostream& out, const SpatialDomain& domain, const GsaDesign& design,
                       const std::vector<SensitivityResult>& results) {
    out << "compartment,t,x,y,param,PI_raw,PI_clamped,TI_raw,TI_clamped,variance,mean,status\n";
    const double nan = std::nan("");
    for (const SensitivityResult& r : results) {
        const Point c = domain.center(r.point.cell);
        const SobolIndices& ix = r.indices;
        const bool ok = ix.status == IndexStatus::kOk;
        for (std::size_t i = 0; i < design.ranges.size(); ++i) {
            Row(out) << compartment_name(r.point.compartment) << r.point.time << c.x << c.y << design.ranges[i].name
                     << (ok ? ix.pi_raw[i] : nan) << (ok ? ix.pi(i) : nan) << (ok ? ix.ti_raw[i] : nan)
                     << (ok ? ix.ti(i) : nan) << (ix.status == IndexStatus::kMissing ? nan : ix.variance)
                     << (ix.status == IndexStatus::kMissing ? nan : ix.mean) << status_name(ix.status);
        }
    }
}

void write_design_manifest(std::ostream& out, const GsaDesign& design) {
    out << "row_id,block,param_substituted";
    for (const ParameterRange& r : design.ranges) out << ',' << r.name;
    out << '\n';
    for (std::size_t row = 0; row < design.rows.size(); ++row) {
        const DesignRow& d = design.rows[row];
        Row line(out);
        line << row << block_name(d.block) << (d.param < 0 ? std::string() : design.ranges[d.param].name);
        for (double v : d.values) line << v;
    }
}

void write_analysis_report(std::ostream& out, const std::vector<ReportRow>& rows) {
    out << "quantity,lambda_fit,r_squared\n";
    for (const ReportRow& r : rows) Row(out) << r.quantity << r.lambda_fit << r.r_squared;
}

void write_eigenpair(std::ostream& out, const SpatialDomain& domain, const SpectralResult& result) {
    out << "x,y,phi_1\n";
    for (std::size_t i = 0; i < result.phi_1.size(); ++i) {
        const Point c = domain.center(static_cast<int>(i));
        Row(out) << c.x << c.y << result.phi_1[i];
    }
}

void write_heatmap(std::ostream& out, const HeatmapGrid& grid) {
    out << "x,y,value\n";
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) Row(out) << grid.x[i] << grid.y[j] << grid.at(i, j);
    }
}

void write_transect(std::ostream& out, const Transect& transect, const std::vector<double>& times,
                    const std::vector<std::vector<double>>& series, const std::string& label) {
    out << "point,x,y,t," << label << '\n';
    for (std::size_t p = 0; p < series.size(); ++p) {
        for (std::size_t s = 0; s < series[p].size(); ++s) {
            Row(out) << p + 1 << transect.points[p].x << transect.points[p].y << times[s] << series[p][s];
        }
    }
}

void write_class_means(std::ostream& out, const std::string& param, const ClassMeans& means,
                       const std::vector<double>& times, std::size_t points) {
    out << "param,class,low,high,runs,point,t,mean\n";
    for (std::size_t c = 0; c < means.means.size(); ++c) {
        for (std::size_t p = 0; p < points; ++p) {
            for (std::size_t s = 0; s < times.size(); ++s) {
                Row(out) << param << c + 1 << means.boundaries[c] << means.boundaries[c + 1] << means.counts[c] << p + 1
                         << times[s] << means.means[c][p * times.size() + s];
            }
        }
    }
}

} // namespace vbsim
