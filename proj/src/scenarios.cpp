#include "vbsim/scenarios.hpp"

#include "vbsim/diffusion.hpp"
#include "vbsim/error.hpp"
#include "vbsim/splitting.hpp"

#include <cmath>
#include <sstream>

namespace vbsim {

long whole_steps(double span, double dt, const char* what) {
    if (!(span > 0.0) || !(dt > 0.0)) {
        throw SolverError(std::string(what) + " must be positive");
    }
    const double ratio = span / dt;
    const long n = std::lround(ratio);
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
        throw SolverError(std::string(what) + " is not a whole multiple of the time step");
    }
    return n;
}

void SimulationConfig::validate() const {
    if (!domain) {
        throw SolverError("simulation has no domain");
    }
    const std::size_t n = domain->size();
    params.validate(n);
    initial.validate(n);
    if (!(t_end > 0.0)) {
        throw SolverError("t_end must be positive");
    }
    whole_steps(t_end, dt, "t_end");
    const long cadence_steps = whole_steps(cadence, dt, "cadence");
    if (whole_steps(t_end, dt, "t_end") % cadence_steps != 0) {
        throw SolverError("cadence does not divide t_end");
    }
    if (impulse) {
        whole_steps(impulse->period, dt, "impulse period");
        if (impulse->vector_reset_profile.size() != n) {
            throw SolverError("vector reset profile size does not match domain");
        }
        for (double v : impulse->vector_reset_profile) {
            if (!(v >= 0.0)) {
                throw SolverError("vector reset profile must be nonnegative");
            }
        }
    }
}

namespace {

double max_host_deviation(const StateFields& s, const std::vector<double>& n_ref) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_ref.size(); ++i) {
        const double total = s.sh[i] + s.eh[i] + s.ih[i];
        const double dev = std::abs(total - n_ref[i]) / (n_ref[i] > 0.0 ? n_ref[i] : 1.0);
        worst = std::max(worst, dev);
    }
    return worst;
}

LedgerEntry make_entry(const StateFields& s, const std::vector<double>& n_ref, double area, double clamped) {
    LedgerEntry e;
    for (double v : s.host_totals()) e.host_total += v;
    e.max_host_deviation = max_host_deviation(s, n_ref);
    e.vector_integral = s.vector_integral(area);
    e.clamped_mass = clamped;
    return e;
}

std::string at_time(const std::string& what, double t) {
    std::ostringstream os;
    os << what << " (at t=" << t << ")";
    return os.str();
}

double relative_change(double value, double reference) {
    return std::abs(value - reference) / (reference != 0.0 ? std::abs(reference) : 1.0);
}

Trajectory run(const SimulationConfig& config, const StepObserver& observer) {
    config.validate();
    const SpatialDomain& domain = *config.domain;
    const double area = domain.cell_area();
    const long steps = whole_steps(config.t_end, config.dt, "t_end");
    const long cadence_steps = whole_steps(config.cadence, config.dt, "cadence");
    const long period_steps = config.impulse ? whole_steps(config.impulse->period, config.dt, "impulse period") : 0;

    const SplitStepper stepper(domain, config.params, config.dt, config.scheme, {}, {}, config.stages);
    StateFields state = config.initial;

    Trajectory traj;
    traj.host_reference = state.host_totals();
    traj.times.push_back(0.0);
    traj.snapshots.push_back(state);
    traj.ledger.push_back(make_entry(state, traj.host_reference, area, 0.0));

    RunDiagnostics& diag = traj.diagnostics;
    double reset_integral = state.vector_integral(area);
    double previous_integral = reset_integral;

    for (long k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k) * config.dt;
        try {
            diag.clamped_mass += stepper.step(state).clamped_mass;
        } catch (const SolverError& e) {
            throw SolverError(at_time(e.what(), t));
        }
        const double integral = state.vector_integral(area);
        diag.max_vector_step_drift = std::max(diag.max_vector_step_drift, relative_change(integral, previous_integral));
        diag.max_vector_drift_since_reset =
            std::max(diag.max_vector_drift_since_reset, relative_change(integral, reset_integral));
        diag.max_host_deviation = std::max(diag.max_host_deviation, max_host_deviation(state, traj.host_reference));
        previous_integral = integral;

        bool impulse_applied = false;
        if (period_steps > 0 && k % period_steps == 0) {
            state.sv = config.impulse->vector_reset_profile;
            std::fill(state.iv.begin(), state.iv.end(), 0.0);
            reset_integral = state.vector_integral(area);
            previous_integral = reset_integral;
            impulse_applied = true;
        }
        if (observer) {
            observer(k, t, state, impulse_applied);
        }
        if (k % cadence_steps == 0) {
            traj.times.push_back(t);
            traj.snapshots.push_back(state);
            traj.ledger.push_back(make_entry(state, traj.host_reference, area, diag.clamped_mass));
        }
    }
    diag.steps = steps;
    return traj;
}

} // namespace

Trajectory simulate_m1(const SimulationConfig& config, const StepObserver& observer) {
    if (config.impulse) {
        throw SolverError("simulate_m1 requires a configuration without impulse schedule");
    }
    return run(config, observer);
}

Trajectory simulate_m2(const SimulationConfig& config, const StepObserver& observer) {
    if (!config.impulse) {
        throw SolverError("simulate_m2 requires an impulse schedule");
    }
    return run(config, observer);
}

Trajectory simulate(const SimulationConfig& config, const StepObserver& observer) {
    return config.impulse ? simulate_m2(config, observer) : simulate_m1(config, observer);
}

namespace {

// Per-cell state of the reduced reaction with its two memory accumulators:
//   integral  = int_0^t i_v
//   memory    = int_0^t exp(eps (tau - t)) exp(-beta_bar * integral(tau)) dtau
struct ReducedCell {
    double n = 0.0;
    double beta_h = 0.0;
    double beta_bar = 0.0;  // beta_v / D
    double epsilon = 1.0;
    double sh0 = 0.0;       // initial susceptible fraction
    double ih0 = 0.0;       // initial infected fraction
    double integral = 0.0;
    double memory = 0.0;
    double decay = 1.0;     // exp(-beta_bar * integral)
};

double infected_fraction(const ReducedCell& c, double t, double memory) {
    return 1.0 - (1.0 - c.ih0) * std::exp(-c.epsilon * t) - c.epsilon * c.sh0 * memory;
}

// Implicit step of d_t i = (a - i) f over [t, t + h]; trapezoid rule for the accumulators.
double reduced_reaction(ReducedCell& c, double iv, double a, double t, double h) {
    const double e = std::exp(-c.epsilon * h);
    auto evaluate = [&](double y, double& integral, double& decay, double& memory, double& f, double& df) {
        integral = c.integral + 0.5 * h * (iv + y);
        decay = std::exp(-c.beta_bar * integral);
        memory = e * c.memory + 0.5 * h * (e * c.decay + decay);
        f = c.n * c.beta_h * infected_fraction(c, t + h, memory);
        df = c.n * c.beta_h * c.epsilon * c.sh0 * c.beta_bar * 0.25 * h * h * decay;
    };
    double y = iv;
    double integral = 0.0, decay = 0.0, memory = 0.0, f = 0.0, df = 0.0;
    for (int it = 0; it < 50; ++it) {
        evaluate(y, integral, decay, memory, f, df);
        const double g = y - iv - h * (a - y) * f;
        const double dg = 1.0 + h * f - h * (a - y) * df;
        const double next = y - g / dg;
        if (std::abs(next - y) <= 1e-14 * std::max(1.0, std::abs(y))) {
            y = next;
            break;
        }
        y = next;
    }
    evaluate(y, integral, decay, memory, f, df);
    c.integral = integral;
    c.decay = decay;
    c.memory = memory;
    return y;
}

} // namespace

ReducedTrajectory simulate_reduced(const SimulationConfig& config) {
    if (config.impulse) {
        throw SolverError("the reduced model applies to the non-impulsive setting only");
    }
    config.validate();
    const SpatialDomain& domain = *config.domain;
    const std::size_t n = domain.size();
    const long steps = whole_steps(config.t_end, config.dt, "t_end");
    const long cadence_steps = whole_steps(config.cadence, config.dt, "cadence");

    // The reduced equation is written for D * Laplacian of the rescaled fields,
    // which is the non-Fickian operator applied to the original densities.
    ModelParams diffusion_params = config.params;
    diffusion_params.formulation = Formulation::kNonFickian;
    const DiffusionSolver diffusion(domain, diffusion_params, config.dt);

    std::vector<ReducedCell> cells(n);
    std::vector<double> d(n), iv(n), a(n), f(n);
    const StateFields& s0 = config.initial;
    for (std::size_t i = 0; i < n; ++i) {
        ReducedCell& c = cells[i];
        d[i] = config.params.diffusion[i];
        c.n = s0.sh[i] + s0.eh[i] + s0.ih[i];
        c.beta_h = config.params.beta_h[i];
        c.beta_bar = config.params.beta_v[i] / d[i];
        c.epsilon = config.params.epsilon;
        if (c.n > 0.0) {
            c.sh0 = s0.sh[i] / c.n;
            c.ih0 = s0.ih[i] / c.n;
        }
        iv[i] = d[i] * s0.iv[i];
        a[i] = d[i] * (s0.sv[i] + s0.iv[i]);
        f[i] = c.n * c.beta_h * c.ih0;
    }

    ReducedTrajectory out;
    for (const ReducedCell& c : cells) out.initial_infected_fraction.push_back(c.ih0);
    auto record = [&](double t) {
        out.times.push_back(t);
        out.iv.push_back(iv);
        out.a.push_back(a);
        out.f.push_back(f);
    };
    record(0.0);

    // Both rescaled fields diffuse with the same operator as the densities.
    auto disperse = [&](std::vector<double>& w) {
        for (std::size_t i = 0; i < n; ++i) w[i] /= d[i];
        diffusion.step(w);
        for (std::size_t i = 0; i < n; ++i) w[i] = std::max(0.0, w[i]) * d[i];
    };
    auto react = [&](double t, double h) {
        for (std::size_t i = 0; i < n; ++i) {
            iv[i] = std::max(0.0, reduced_reaction(cells[i], iv[i], a[i], t, h));
            f[i] = cells[i].n * cells[i].beta_h * infected_fraction(cells[i], t + h, cells[i].memory);
        }
    };

    const double dt = config.dt;
    for (long k = 1; k <= steps; ++k) {
        const double t0 = static_cast<double>(k - 1) * dt;
        try {
            if (config.scheme == SplittingScheme::kLie) {
                react(t0, dt);
                disperse(iv);
                disperse(a);
            } else {
                react(t0, 0.5 * dt);
                disperse(iv);
                disperse(a);
                react(t0 + 0.5 * dt, 0.5 * dt);
            }
        } catch (const SolverError& e) {
            throw SolverError(at_time(e.what(), static_cast<double>(k) * dt));
        }
        if (k % cadence_steps == 0) {
            record(static_cast<double>(k) * dt);
        }
    }
    return out;
}

StateFields make_initial_state(const SpatialDomain& domain, const CellCoefficient& host_density,
                               const CellCoefficient& vector_density, const std::vector<Introduction>& introductions) {
    const std::size_t n = domain.size();
    StateFields s = StateFields::zeros(n);
    s.sh = host_density.expand(n);
    s.sv = vector_density.expand(n);
    if (s.sh.size() != n || s.sv.size() != n) {
        throw SolverError("initial density field size does not match domain");
    }
    for (const Introduction& intro : introductions) {
        const auto cell = domain.locate(intro.location);
        if (!cell) {
            throw SolverError("introduction point outside domain");
        }
        if (!(intro.amount >= 0.0)) {
            throw SolverError("introduction amount must be nonnegative");
        }
        const auto c = static_cast<std::size_t>(*cell);
        switch (intro.compartment) {
        case Compartment::kEh:
        case Compartment::kIh: {
            const double moved = std::min(intro.amount, s.sh[c]);
            s.sh[c] -= moved;
            field(s, intro.compartment)[c] += moved;
            break;
        }
        case Compartment::kIv:
        case Compartment::kSv:
            field(s, intro.compartment)[c] += intro.amount;
            break;
        case Compartment::kSh:
            s.sh[c] += intro.amount;
            break;
        }
    }
    return s;
}

} // namespace vbsim
