#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP version (used by the
// solvers) and a serial reference in `kernels::serial` that the tests compare
// against. Both produce bit-identical results: per-cell work is independent,
// and reductions are summed over fixed-size chunks in a fixed order, so the
// result does not depend on the thread count.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "vbsim/model.hpp"

namespace vbsim {

class SpatialDomain;

/// Symmetric five-point finite-volume operator on the active cells:
///   (A x)_i = diag_i x_i - sum_k coupling_ik x_neighbor(i,k)
/// with diag_i = mass_i + sum_k coupling_ik. Missing neighbors carry zero
/// coupling, which realizes the no-flux boundary.
struct StencilOperator {
    std::vector<std::array<int, 4>> neighbors;
    std::vector<std::array<double, 4>> coupling;
    std::vector<double> diag;

    std::size_t size() const { return diag.size(); }
};

/// mass_i + scale * sum of face conductances. For kNonFickian faces have unit
/// conductance; for kFickian the harmonic mean of D on both sides.
StencilOperator make_stencil(const SpatialDomain& domain, std::span<const double> mass, double scale,
                             std::span<const double> face_diffusion);

struct ReactionRates {
    double beta_v;
    double beta_h;
    double epsilon;
};

struct NewtonOptions {
    double tolerance = 1e-10;  // residual infinity norm, relative to max(1, |state|_inf)
    int max_iterations = 50;
};

/// Outcome of one per-cell implicit reaction solve.
struct CellSolve {
    int iterations = 0;
    bool converged = false;
};

/// Implicit (theta-method) step of the five-compartment reaction system in one cell.
/// `x` holds (S_h, E_h, I_h, S_v, I_v) and is overwritten.
CellSolve solve_reaction_cell(std::array<double, 5>& x, const ReactionRates& rates, double dt,
                              const NewtonOptions& options, StageIntegrator stage = StageIntegrator::kImplicitEuler);

namespace kernels {

inline constexpr std::size_t kReductionChunk = 256;

void apply(const StencilOperator& op, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);

/// Implicit reaction step over all cells. Returns the index of the first cell
/// whose Newton solve failed, or -1.
long reaction(StateFields& state, const ModelParams& params, double dt, const NewtonOptions& options,
              StageIntegrator stage = StageIntegrator::kImplicitEuler);

/// Sets negative entries to zero; returns the removed (negative) mass as a positive number.
double clamp_negative(std::span<double> values);

namespace serial {
void apply(const StencilOperator& op, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
long reaction(StateFields& state, const ModelParams& params, double dt, const NewtonOptions& options,
              StageIntegrator stage = StageIntegrator::kImplicitEuler);
} // namespace serial

} // namespace kernels
} // namespace vbsim
