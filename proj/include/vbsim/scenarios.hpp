#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "vbsim/geometry.hpp"
#include "vbsim/model.hpp"

namespace vbsim {

/// Annual vector emergence/death: at every multiple of `period` the
/// susceptible vectors are reset to `vector_reset_profile` and the infected
/// vectors to zero. Hosts are carried over unchanged.
struct ImpulseSchedule {
    double period = 1.0;
    std::vector<double> vector_reset_profile;
};

struct SimulationConfig {
    std::shared_ptr<const SpatialDomain> domain;
    ModelParams params;
    StateFields initial;
    double dt = 0.01;
    double t_end = 1.0;
    double cadence = 1.0;  // snapshot spacing; must divide t_end
    SplittingScheme scheme = SplittingScheme::kStrang;
    StageIntegrator stages = StageIntegrator::kImplicitEuler;
    std::optional<ImpulseSchedule> impulse;  // set for the impulsive model

    /// Throws SolverError on any violated precondition.
    void validate() const;
};

/// Conserved quantities recorded with each snapshot.
struct LedgerEntry {
    double host_total = 0.0;          // sum over cells of S_h + E_h + I_h
    double max_host_deviation = 0.0;  // max_x |S_h+E_h+I_h - N| / N
    double vector_integral = 0.0;     // integral of S_v + I_v
    double clamped_mass = 0.0;        // cumulative negative round-off removed
};

/// Worst-case conservation figures over every step of a run (not only snapshots).
struct RunDiagnostics {
    long steps = 0;
    double max_host_deviation = 0.0;
    /// Largest relative change of the vector integral across one step, impulses excluded.
    double max_vector_step_drift = 0.0;
    /// Largest relative distance of the vector integral from its value right
    /// after the most recent impulse (or from the initial value).
    double max_vector_drift_since_reset = 0.0;
    double clamped_mass = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<StateFields> snapshots;
    std::vector<LedgerEntry> ledger;
    std::vector<double> host_reference;  // N(x)
    RunDiagnostics diagnostics;
};

/// Called after every step with the step index, time and state; for the
/// impulsive model the state at a multiple of the period is the post-reset one.
using StepObserver = std::function<void(long step, double t, const StateFields& state, bool impulse_applied)>;

Trajectory simulate_m1(const SimulationConfig& config, const StepObserver& observer = {});
Trajectory simulate_m2(const SimulationConfig& config, const StepObserver& observer = {});
/// Dispatches on the presence of an impulse schedule.
Trajectory simulate(const SimulationConfig& config, const StepObserver& observer = {});

/// Reduced single-equation system for the rescaled infected vectors
/// i_v = D I_v, driven by the pure-diffusion total a = D (S_v + I_v). Host
/// history enters only through the running integral of i_v.
struct ReducedTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> iv;  // D * I_v
    std::vector<std::vector<double>> a;   // D * (S_v + I_v)
    std::vector<std::vector<double>> f;   // N beta_h i_h, the coupling coefficient
    std::vector<double> initial_infected_fraction;  // i_h(0, x)
};

ReducedTrajectory simulate_reduced(const SimulationConfig& config);

/// Point introduction of the pathogen.
struct Introduction {
    Compartment compartment = Compartment::kIv;
    Point location;
    double amount = 1.0;

    bool operator==(const Introduction&) const = default;
};

/// Uniform-or-field densities plus point introductions. An introduction into
/// E_h or I_h moves hosts out of S_h; one into I_v adds vectors.
StateFields make_initial_state(const SpatialDomain& domain, const CellCoefficient& host_density,
                               const CellCoefficient& vector_density, const std::vector<Introduction>& introductions);

/// Number of whole steps of size `dt` in `span`; throws when not integral.
long whole_steps(double span, double dt, const char* what);

} // namespace vbsim
