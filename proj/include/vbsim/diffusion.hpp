#pragma once

#include <span>
#include <vector>

#include "vbsim/kernels.hpp"
#include "vbsim/model.hpp"

namespace vbsim {

class SpatialDomain;

struct DiffusionOptions {
    double relative_tolerance = 1e-12;
    int max_iterations = 0;  // 0 selects 10 * cells + 100
};

struct LinearSolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for the SPD stencil operator.
/// `x` holds the initial guess on entry. Throws SolverError("diffusion solve
/// failed") if the tolerance is not reached within `max_iterations`.
LinearSolveStats conjugate_gradient(const StencilOperator& op, std::span<const double> b, std::span<double> x,
                                    double relative_tolerance, int max_iterations);

/// Backward-Euler dispersal step for one vector density field under no-flux
/// boundaries, discretized with the conservative five-point stencil.
///
/// kNonFickian solves for w = D u:  w/D + dt/h^2 * K w = u_old, K unit-weight graph Laplacian.
/// kFickian solves for u:           u + dt/h^2 * K_D u = u_old, K_D weighted by face-harmonic D.
///
/// Both systems are symmetric M-matrices, so the step conserves sum(u) and
/// preserves nonnegativity up to the linear-solver tolerance. With
/// StageIntegrator::kTrapezoidal half of the stencil moves to the right-hand
/// side (Crank-Nicolson); conservation still holds, the sign property does not.
class DiffusionSolver {
public:
    DiffusionSolver(const SpatialDomain& domain, const ModelParams& params, double dt, DiffusionOptions options = {},
                    StageIntegrator stage = StageIntegrator::kImplicitEuler);

    LinearSolveStats step(std::span<double> density) const;

    double dt() const { return dt_; }
    const StencilOperator& stencil() const { return op_; }

private:
    StencilOperator op_;
    StencilOperator explicit_op_;  // (1 - theta) share of the stencil, empty for implicit Euler
    std::vector<double> weight_;  // unknown = weight * density
    double dt_;
    DiffusionOptions options_;
};

std::vector<double> diffusion_step(const SpatialDomain& domain, std::span<const double> density,
                                   const ModelParams& params, double dt, const DiffusionOptions& options = {});

} // namespace vbsim
