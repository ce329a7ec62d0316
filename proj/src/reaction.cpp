#include "vbsim/reaction.hpp"

#include "vbsim/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace vbsim {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

// Rates of change of (S_h, E_h, I_h, S_v, I_v).
Vec5 rates_of_change(const Vec5& x, const ReactionRates& r) {
    const double infection_h = r.beta_v * x[0] * x[4];
    const double infection_v = r.beta_h * x[3] * x[2];
    Vec5 f;
    f << -infection_h, infection_h - r.epsilon * x[1], r.epsilon * x[1], -infection_v, infection_v;
    return f;
}

// theta-method: x - x0 - dt (theta f(x) + (1 - theta) f(x0)); `explicit_part` holds dt (1 - theta) f(x0).
Vec5 residual(const Vec5& x, const Vec5& x0, const Vec5& explicit_part, const ReactionRates& r, double theta_dt) {
    return x - x0 - theta_dt * rates_of_change(x, r) - explicit_part;
}

Mat5 jacobian(const Vec5& x, const ReactionRates& r, double dt) {
    Mat5 df = Mat5::Zero();
    df(0, 0) = -r.beta_v * x[4];
    df(0, 4) = -r.beta_v * x[0];
    df(1, 0) = r.beta_v * x[4];
    df(1, 1) = -r.epsilon;
    df(1, 4) = r.beta_v * x[0];
    df(2, 1) = r.epsilon;
    df(3, 2) = -r.beta_h * x[3];
    df(3, 3) = -r.beta_h * x[2];
    df(4, 2) = r.beta_h * x[3];
    df(4, 3) = r.beta_h * x[2];
    return Mat5::Identity() - dt * df;
}

// Gaussian elimination in natural order. The first four pivots are at least
// one for every nonnegative state, and host rows never mix with vector rows
// when their coupling coefficient vanishes, so decoupled compartments stay
// bit-exact.
Vec5 solve_natural(Mat5 a, Vec5 b) {
    for (int k = 0; k < 5; ++k) {
        for (int i = k + 1; i < 5; ++i) {
            if (a(i, k) == 0.0) continue;
            const double m = a(i, k) / a(k, k);
            for (int j = k; j < 5; ++j) a(i, j) -= m * a(k, j);
            b[i] -= m * b[k];
        }
    }
    Vec5 x;
    for (int k = 4; k >= 0; --k) {
        double s = b[k];
        for (int j = k + 1; j < 5; ++j) s -= a(k, j) * x[j];
        x[k] = s / a(k, k);
    }
    return x;
}

// Fallback for stiff steps where the full Newton iteration stalls. The
// implicit equations eliminate to one scalar equation phi(v) = 0 in the new
// I_v; with nonnegative data phi is concave, phi(0) >= 0 and
// phi(c3 + c4) <= 0, so a bracketed Newton iteration always converges to the
// nonnegative root.
bool solve_scalar(const Vec5& c, const ReactionRates& r, double tau, double tol, int max_iterations, Vec5& x) {
    if (c.minCoeff() < 0.0) return false;
    const double kv = tau * r.beta_v;
    const double kh = tau * r.beta_h;
    const double ke = tau * r.epsilon;
    auto assemble = [&](double v) {
        Vec5 y;
        y[4] = v;
        y[0] = c[0] / (1.0 + kv * v);
        y[1] = (c[1] + kv * y[0] * v) / (1.0 + ke);
        y[2] = c[2] + ke * y[1];
        y[3] = c[3] / (1.0 + kh * y[2]);
        return y;
    };
    double lo = 0.0;
    double hi = c[3] + c[4];
    double v = std::clamp(c[4], lo, hi);
    for (int it = 0; it < max_iterations; ++it) {
        const Vec5 y = assemble(v);
        const double phi = c[4] + kh * y[3] * y[2] - v;
        if (std::abs(phi) < 0.1 * tol || hi - lo <= 1e-16 * std::max(1.0, hi)) {
            x = y;
            x[4] = c[4] + kh * y[3] * y[2];
            return true;
        }
        if (phi > 0.0) {
            lo = v;
        } else {
            hi = v;
        }
        const double shv = c[0] / ((1.0 + kv * v) * (1.0 + kv * v));
        const double dih = ke * kv * shv / (1.0 + ke);
        const double dphi = kh * c[3] / ((1.0 + kh * y[2]) * (1.0 + kh * y[2])) * dih - 1.0;
        double next = dphi != 0.0 ? v - phi / dphi : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        v = next;
    }
    return false;
}

} // namespace

CellSolve solve_reaction_cell(std::array<double, 5>& state, const ReactionRates& rates, double dt,
                              const NewtonOptions& options, StageIntegrator stage) {
    const Vec5 x0 = Eigen::Map<const Vec5>(state.data());
    const double theta = implicit_weight(stage);
    const double theta_dt = theta * dt;
    const Vec5 explicit_part = theta < 1.0 ? Vec5((1.0 - theta) * dt * rates_of_change(x0, rates)) : Vec5::Zero();
    const double tol = options.tolerance * std::max(1.0, x0.cwiseAbs().maxCoeff());
    Vec5 x = x0;
    Vec5 f = residual(x, x0, explicit_part, rates, theta_dt);
    double norm = f.cwiseAbs().maxCoeff();
    CellSolve out;
    bool stalled = false;
    // At least one iteration: the tolerance is absolute, and components far
    // below it would otherwise never move.
    while (norm >= tol || (out.iterations == 0 && norm > 0.0 && !stalled)) {
        if (stalled || out.iterations >= options.max_iterations) {
            Vec5 y;
            if (!solve_scalar(x0 + explicit_part, rates, theta_dt, tol, options.max_iterations, y)) return out;
            f = residual(y, x0, explicit_part, rates, theta_dt);
            if (!(f.cwiseAbs().maxCoeff() < tol)) return out;
            x = y;
            break;
        }
        ++out.iterations;
        const Vec5 step = solve_natural(jacobian(x, rates, theta_dt), -f);
        double damping = 1.0;
        Vec5 trial = x + step;
        Vec5 f_trial = residual(trial, x0, explicit_part, rates, theta_dt);
        // Halve the step while the residual grows or the iterate leaves the
        // nonnegative orthant; the system has spurious roots with negative entries.
        auto rejected = [&] { return f_trial.cwiseAbs().maxCoeff() > norm || trial.minCoeff() < -tol; };
        for (int k = 0; k < 30 && rejected(); ++k) {
            damping *= 0.5;
            trial = x + damping * step;
            f_trial = residual(trial, x0, explicit_part, rates, theta_dt);
        }
        if (rejected()) {
            stalled = true;
            continue;
        }
        x = trial;
        f = f_trial;
        norm = f.cwiseAbs().maxCoeff();
    }
    Eigen::Map<Vec5>(state.data()) = x;
    out.converged = true;
    return out;
}

void reaction_step_in_place(StateFields& state, const ModelParams& params, double dt, const NewtonOptions& options,
                            double* clamped_mass, StageIntegrator stage) {
    if (!(dt > 0.0)) {
        throw SolverError("time step must be positive");
    }
    const long failed = kernels::reaction(state, params, dt, options, stage);
    if (failed >= 0) {
        throw SolverError("reaction solver diverged at cell " + std::to_string(failed));
    }
    double removed = 0.0;
    for (auto* f : {&state.sh, &state.eh, &state.ih, &state.sv, &state.iv}) {
        removed += kernels::clamp_negative(*f);
    }
    if (clamped_mass) {
        *clamped_mass += removed;
    }
}

StateFields reaction_step(const StateFields& state, const ModelParams& params, double dt,
                          const NewtonOptions& options) {
    StateFields out = state;
    reaction_step_in_place(out, params, dt, options);
    return out;
}

} // namespace vbsim
