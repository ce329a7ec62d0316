#include "vbsim/splitting.hpp"

#include "vbsim/error.hpp"
#include "vbsim/geometry.hpp"
#include "vbsim/reaction.hpp"

namespace vbsim {

SplitStepper::SplitStepper(const SpatialDomain& domain, const ModelParams& params, double dt, SplittingScheme scheme,
                           NewtonOptions newton, DiffusionOptions diffusion, StageIntegrator stage)
    : params_(params),
      dt_(dt),
      scheme_(scheme),
      newton_(newton),
      stage_(stage),
      diffusion_(domain, params, dt, diffusion, stage) {}

StepReport SplitStepper::step(StateFields& state) const {
    StepReport report;
    auto disperse = [&] {
        report.diffusion_iterations += diffusion_.step(state.sv).iterations;
        report.diffusion_iterations += diffusion_.step(state.iv).iterations;
        report.clamped_mass += kernels::clamp_negative(state.sv);
        report.clamped_mass += kernels::clamp_negative(state.iv);
    };
    if (scheme_ == SplittingScheme::kLie) {
        reaction_step_in_place(state, params_, dt_, newton_, &report.clamped_mass, stage_);
        disperse();
    } else {
        reaction_step_in_place(state, params_, 0.5 * dt_, newton_, &report.clamped_mass, stage_);
        disperse();
        reaction_step_in_place(state, params_, 0.5 * dt_, newton_, &report.clamped_mass, stage_);
    }
    return report;
}

StateFields split_step(const SpatialDomain& domain, const StateFields& state, const ModelParams& params, double dt,
                       SplittingScheme scheme, StageIntegrator stage) {
    state.validate(domain.size());
    StateFields out = state;
    SplitStepper(domain, params, dt, scheme, {}, {}, stage).step(out);
    return out;
}

} // namespace vbsim
