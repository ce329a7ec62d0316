#pragma once

#include "vbsim/diffusion.hpp"
#include "vbsim/kernels.hpp"
#include "vbsim/model.hpp"

namespace vbsim {

class SpatialDomain;

struct StepReport {
    double clamped_mass = 0.0;
    int diffusion_iterations = 0;
};

/// One time step of the full model by operator splitting:
///   kLie:    reaction(dt), dispersal(dt)
///   kStrang: reaction(dt/2), dispersal(dt), reaction(dt/2)
/// Dispersal acts on S_v and I_v only. The stencil is assembled once at
/// construction, so a stepper is tied to one (domain, params, dt).
class SplitStepper {
public:
    SplitStepper(const SpatialDomain& domain, const ModelParams& params, double dt,
                 SplittingScheme scheme = SplittingScheme::kStrang, NewtonOptions newton = {},
                 DiffusionOptions diffusion = {}, StageIntegrator stage = StageIntegrator::kImplicitEuler);

    StepReport step(StateFields& state) const;

    double dt() const { return dt_; }
    SplittingScheme scheme() const { return scheme_; }

private:
    ModelParams params_;
    double dt_;
    SplittingScheme scheme_;
    NewtonOptions newton_;
    StageIntegrator stage_;
    DiffusionSolver diffusion_;
};

StateFields split_step(const SpatialDomain& domain, const StateFields& state, const ModelParams& params, double dt,
                       SplittingScheme scheme = SplittingScheme::kStrang,
                       StageIntegrator stage = StageIntegrator::kImplicitEuler);

} // namespace vbsim
