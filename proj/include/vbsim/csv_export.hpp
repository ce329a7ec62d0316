#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vbsim/analysis.hpp"
#include "vbsim/geometry.hpp"
#include "vbsim/gsa.hpp"
#include "vbsim/heatmap.hpp"
#include "vbsim/scenarios.hpp"

namespace vbsim {

// Every writer emits a header row, '.' as decimal separator and numbers in
// "%.17g" so values round-trip exactly. Undefined numbers are empty fields.

std::string format_number(double value);

/// t,x,y,S_h,E_h,I_h,S_v,I_v
void write_snapshots(std::ostream& out, const SpatialDomain& domain, const Trajectory& trajectory);

/// t,host_total,max_host_deviation,vector_integral,clamped_mass
void write_ledger(std::ostream& out, const Trajectory& trajectory);

/// compartment,t,x,y,param,PI_raw,PI_clamped,TI_raw,TI_clamped,variance,mean,status
void write_gsa_results(std::ostream& out, const SpatialDomain& domain, const GsaDesign& design,
                       const std::vector<SensitivityResult>& results);

/// row_id,block,param_substituted,<parameter names>
void write_design_manifest(std::ostream& out, const GsaDesign& design);

struct ReportRow {
    std::string quantity;
    double lambda_fit = 0.0;
    double r_squared = 0.0;  // NaN when not applicable
};

/// quantity,lambda_fit,r_squared
void write_analysis_report(std::ostream& out, const std::vector<ReportRow>& rows);

/// x,y,phi_1
void write_eigenpair(std::ostream& out, const SpatialDomain& domain, const SpectralResult& result);

/// x,y,value
void write_heatmap(std::ostream& out, const HeatmapGrid& grid);

/// point,x,y,t,<label>
void write_transect(std::ostream& out, const Transect& transect, const std::vector<double>& times,
                    const std::vector<std::vector<double>>& series, const std::string& label);

/// param,class,low,high,runs,point,t,mean
void write_class_means(std::ostream& out, const std::string& param, const ClassMeans& means,
                       const std::vector<double>& times, std::size_t points);

} // namespace vbsim
