#include "vbsim/kernels.hpp"

#include "vbsim/error.hpp"
#include "vbsim/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace vbsim {

namespace {

// Below this many cells the OpenMP fork/join costs more than the loop.
constexpr std::ptrdiff_t kParallelThreshold = 2048;

double chunk_dot(std::span<const double> x, std::span<const double> y, std::size_t chunk) {
    const std::size_t begin = chunk * kernels::kReductionChunk;
    const std::size_t end = std::min(x.size(), begin + kernels::kReductionChunk);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        s += x[i] * y[i];
    }
    return s;
}

bool react_cell(StateFields& state, const ModelParams& params, double dt, const NewtonOptions& options,
                StageIntegrator stage, std::size_t i) {
    std::array<double, 5> x{state.sh[i], state.eh[i], state.ih[i], state.sv[i], state.iv[i]};
    const ReactionRates rates{params.beta_v[i], params.beta_h[i], params.epsilon};
    const CellSolve r = solve_reaction_cell(x, rates, dt, options, stage);
    state.sh[i] = x[0];
    state.eh[i] = x[1];
    state.ih[i] = x[2];
    state.sv[i] = x[3];
    state.iv[i] = x[4];
    return r.converged;
}

} // namespace

StencilOperator make_stencil(const SpatialDomain& domain, std::span<const double> mass, double scale,
                             std::span<const double> face_diffusion) {
    const std::size_t n = domain.size();
    StencilOperator op;
    op.neighbors.resize(n);
    op.coupling.resize(n);
    op.diag.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& nb = domain.neighbors(static_cast<int>(i));
        op.neighbors[i] = nb;
        double sum = 0.0;
        for (int k = 0; k < 4; ++k) {
            double c = 0.0;
            if (nb[k] >= 0) {
                if (face_diffusion.empty()) {
                    c = scale;
                } else {
                    const double a = face_diffusion[i];
                    const double b = face_diffusion[nb[k]];
                    c = scale * 2.0 * a * b / (a + b);
                }
            }
            op.coupling[i][k] = c;
            sum += c;
        }
        op.diag[i] = mass[i] + sum;
    }
    return op;
}

namespace kernels {

void apply(const StencilOperator& op, std::span<const double> x, std::span<double> y) {
    const auto n = static_cast<std::ptrdiff_t>(op.size());
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double v = op.diag[i] * x[i];
        for (int k = 0; k < 4; ++k) {
            const int j = op.neighbors[i][k];
            if (j >= 0) {
                v -= op.coupling[i][k] * x[j];
            }
        }
        y[i] = v;
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
    const std::size_t chunks = (x.size() + kReductionChunk - 1) / kReductionChunk;
    std::vector<double> partial(chunks);
    const auto nc = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(static) if (static_cast<std::ptrdiff_t>(x.size()) > kParallelThreshold)
    for (std::ptrdiff_t c = 0; c < nc; ++c) {
        partial[c] = chunk_dot(x, y, static_cast<std::size_t>(c));
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

long reaction(StateFields& state, const ModelParams& params, double dt, const NewtonOptions& options,
              StageIntegrator stage) {
    const auto n = static_cast<std::ptrdiff_t>(state.size());
    long failed = -1;
#pragma omp parallel for schedule(static) if (n > kParallelThreshold / 4)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (!react_cell(state, params, dt, options, stage, static_cast<std::size_t>(i))) {
#pragma omp critical(vbsim_reaction_failure)
            {
                if (failed < 0 || i < failed) failed = static_cast<long>(i);
            }
        }
    }
    return failed;
}

double clamp_negative(std::span<double> values) {
    double removed = 0.0;
    for (double& v : values) {
        if (v < 0.0) {
            removed -= v;
            v = 0.0;
        }
    }
    return removed;
}

namespace serial {

void apply(const StencilOperator& op, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < op.size(); ++i) {
        double v = op.diag[i] * x[i];
        for (int k = 0; k < 4; ++k) {
            const int j = op.neighbors[i][k];
            if (j >= 0) {
                v -= op.coupling[i][k] * x[j];
            }
        }
        y[i] = v;
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
    const std::size_t chunks = (x.size() + kReductionChunk - 1) / kReductionChunk;
    double s = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        s += chunk_dot(x, y, c);
    }
    return s;
}

long reaction(StateFields& state, const ModelParams& params, double dt, const NewtonOptions& options,
              StageIntegrator stage) {
    long failed = -1;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (!react_cell(state, params, dt, options, stage, i) && failed < 0) {
            failed = static_cast<long>(i);
        }
    }
    return failed;
}

} // namespace serial
} // namespace kernels
} // namespace vbsim
