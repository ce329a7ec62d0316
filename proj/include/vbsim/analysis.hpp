#pragma once

#include <span>
#include <vector>

#include "vbsim/geometry.hpp"
#include "vbsim/model.hpp"
#include "vbsim/scenarios.hpp"

namespace vbsim {

/// The two nonnegative stationary states of the permanent-vector model for a
/// host profile N(x) and a total vector mass C*:
///   disease-free: (N, 0, 0, C*/(|Omega|_mu D), 0)
///   endemic:      (0, 0, N, 0, C*/(|Omega|_mu D))
struct EquilibriumPair {
    StateFields disease_free;
    StateFields endemic;
};

EquilibriumPair equilibria_m1(const ModelParams& params, const SpatialDomain& domain, std::span<const double> hosts,
                              double c_star);

/// One period of the vector dynamics once every host is infected, started
/// from (S_v^0, 0). This is the periodic state the impulsive model settles on.
struct PeriodicOrbit {
    std::vector<double> times;
    std::vector<std::vector<double>> sv;
    std::vector<std::vector<double>> iv;
};

PeriodicOrbit periodic_equilibrium_m2(const ModelParams& params, const SpatialDomain& domain,
                                      std::span<const double> hosts, const ImpulseSchedule& schedule, double dt,
                                      double cadence, SplittingScheme scheme = SplittingScheme::kStrang,
                                      StageIntegrator stage = StageIntegrator::kImplicitEuler);

struct SpectralOptions {
    double tolerance = 1e-10;  // change of the eigenvalue between iterations
    int max_iterations = 10000;
};

/// Smallest eigenvalue of  -D Laplacian + potential  with no-flux boundary,
/// i.e. the minimum over phi of
///   ( int |grad phi|^2 dx + int potential phi^2 dmu ) / int phi^2 dmu,  dmu = dx / D.
/// `phi_1` is positive and has unit discrete L2(dmu) norm.
struct SpectralResult {
    double lambda_1 = 0.0;
    std::vector<double> phi_1;
    int iterations = 0;
};

SpectralResult principal_eigenvalue(const SpatialDomain& domain, const CellCoefficient& diffusion,
                                    std::span<const double> potential, const SpectralOptions& options = {});

/// Discrete version of the quotient minimized by `principal_eigenvalue`.
double rayleigh_quotient(const SpatialDomain& domain, const CellCoefficient& diffusion,
                         std::span<const double> potential, std::span<const double> phi);

struct DecayFit {
    double lambda = 0.0;     // negated slope of log(value) against t
    double r_squared = 1.0;
    std::size_t points_used = 0;
};

/// Least-squares fit of value ~ C exp(-lambda t) over the last `tail_fraction`
/// of the samples. Throws AnalysisError("cannot log-fit") on nonpositive values.
DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values, double tail_fraction = 0.5);

/// max over compartments and cells of |a - b|.
double sup_distance(const StateFields& a, const StateFields& b);

/// Discrete L2(dmu) distance of i_v = D I_v to its dmu-mean.
double iv_spread_l2mu(const SpatialDomain& domain, const CellCoefficient& diffusion, std::span<const double> iv);

/// Relative discrete L2 mismatch between the last period of an impulsive run
/// and a periodic orbit sampled at every time step (phases 0..steps-1).
struct OrbitComparison {
    double relative_l2 = 0.0;
    std::size_t samples = 0;
};

OrbitComparison compare_final_period(const SimulationConfig& config, const PeriodicOrbit& orbit);

} // namespace vbsim
