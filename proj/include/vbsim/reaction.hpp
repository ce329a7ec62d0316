#pragma once

#include "vbsim/kernels.hpp"
#include "vbsim/model.hpp"

namespace vbsim {

/// Implicit step of the host/vector contact reactions (no dispersal),
/// solved per cell by damped Newton. Negative round-off is clamped to zero and
/// the clamped amount added to `clamped_mass` when given.
/// Throws SolverError("reaction solver diverged at cell <i>") when a cell
/// fails to converge.
void reaction_step_in_place(StateFields& state, const ModelParams& params, double dt,
                            const NewtonOptions& options = {}, double* clamped_mass = nullptr,
                            StageIntegrator stage = StageIntegrator::kImplicitEuler);

StateFields reaction_step(const StateFields& state, const ModelParams& params, double dt,
                          const NewtonOptions& options = {});

} // namespace vbsim
