#include "vbsim/diffusion.hpp"

#include "vbsim/error.hpp"
#include "vbsim/geometry.hpp"

#include <cmath>

namespace vbsim {

LinearSolveStats conjugate_gradient(const StencilOperator& op, std::span<const double> b, std::span<double> x,
                                    double relative_tolerance, int max_iterations) {
    const std::size_t n = op.size();
    LinearSolveStats stats;
    const double b_norm = std::sqrt(kernels::dot(b, b));
    if (b_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return stats;
    }
    std::vector<double> r(n), z(n), p(n), ap(n);
    kernels::apply(op, x, r);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = b[i] - r[i];
    }
    double r_norm = std::sqrt(kernels::dot(r, r));
    if (r_norm <= relative_tolerance * b_norm) {
        stats.relative_residual = r_norm / b_norm;
        return stats;
    }
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = r[i] / op.diag[i];
        p[i] = z[i];
    }
    double rz = kernels::dot(r, z);
    while (true) {
        if (stats.iterations >= max_iterations) {
            throw SolverError("diffusion solve failed: no convergence after " + std::to_string(max_iterations) +
                              " iterations (relative residual " + std::to_string(r_norm / b_norm) + ")");
        }
        ++stats.iterations;
        kernels::apply(op, p, ap);
        const double pap = kernels::dot(p, ap);
        if (!(pap > 0.0)) {
            throw SolverError("diffusion solve failed: operator is not positive definite");
        }
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        r_norm = std::sqrt(kernels::dot(r, r));
        if (r_norm <= relative_tolerance * b_norm) {
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = r[i] / op.diag[i];
        }
        const double rz_next = kernels::dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = z[i] + beta * p[i];
        }
    }
    stats.relative_residual = r_norm / b_norm;
    return stats;
}

DiffusionSolver::DiffusionSolver(const SpatialDomain& domain, const ModelParams& params, double dt,
                                 DiffusionOptions options, StageIntegrator stage)
    : dt_(dt), options_(options) {
    if (!(dt > 0.0)) {
        throw SolverError("time step must be positive");
    }
    const std::size_t n = domain.size();
    params.validate(n);
    const std::vector<double> d = params.diffusion.expand(n);
    const double theta = implicit_weight(stage);
    const double scale = theta * dt / domain.cell_area();
    const double explicit_scale = (1.0 - theta) * dt / domain.cell_area();
    std::vector<double> mass(n);
    const std::vector<double> no_mass(n, 0.0);
    if (params.formulation == Formulation::kNonFickian) {
        weight_ = d;
        for (std::size_t i = 0; i < n; ++i) mass[i] = 1.0 / d[i];
        op_ = make_stencil(domain, mass, scale, {});
        if (explicit_scale > 0.0) explicit_op_ = make_stencil(domain, no_mass, explicit_scale, {});
    } else {
        weight_.assign(n, 1.0);
        mass.assign(n, 1.0);
        op_ = make_stencil(domain, mass, scale, d);
        if (explicit_scale > 0.0) explicit_op_ = make_stencil(domain, no_mass, explicit_scale, d);
    }
    if (options_.max_iterations <= 0) {
        options_.max_iterations = static_cast<int>(10 * n + 100);
    }
}

LinearSolveStats DiffusionSolver::step(std::span<double> density) const {
    const std::size_t n = op_.size();
    if (density.size() != n) {
        throw SolverError("diffusion solve failed: field size does not match domain");
    }
    std::vector<double> rhs(density.begin(), density.end());
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = weight_[i] * density[i];
    }
    if (explicit_op_.size() == n) {
        std::vector<double> flux(n);
        kernels::apply(explicit_op_, w, flux);
        for (std::size_t i = 0; i < n; ++i) rhs[i] -= flux[i];
    }
    const LinearSolveStats stats =
        conjugate_gradient(op_, rhs, w, options_.relative_tolerance, options_.max_iterations);
    for (std::size_t i = 0; i < n; ++i) {
        density[i] = w[i] / weight_[i];
    }
    return stats;
}

std::vector<double> diffusion_step(const SpatialDomain& domain, std::span<const double> density,
                                   const ModelParams& params, double dt, const DiffusionOptions& options) {
    for (double v : density) {
        if (!(v >= 0.0)) {
            throw SolverError("diffusion input must be nonnegative");
        }
    }
    std::vector<double> out(density.begin(), density.end());
    DiffusionSolver(domain, params, dt, options).step(out);
    return out;
}

} // namespace vbsim
