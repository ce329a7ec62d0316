#include "vbsim/analysis.hpp"

#include "vbsim/diffusion.hpp"
#include "vbsim/error.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vbsim {

EquilibriumPair equilibria_m1(const ModelParams& params, const SpatialDomain& domain, std::span<const double> hosts,
                              double c_star) {
    const std::size_t n = domain.size();
    if (hosts.size() != n) {
        throw AnalysisError("host field size does not match domain");
    }
    if (!(c_star > 0.0)) {
        throw AnalysisError("total vector mass must be positive");
    }
    for (double v : hosts) {
        if (!(v >= 0.0)) throw AnalysisError("host density must be nonnegative");
    }
    const std::vector<double> d = params.diffusion.expand(n);
    const DomainMeasures m = domain_measures(domain, d);

    EquilibriumPair eq{StateFields::zeros(n), StateFields::zeros(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double vectors = c_star / (m.mu * d[i]);
        eq.disease_free.sh[i] = hosts[i];
        eq.disease_free.sv[i] = vectors;
        eq.endemic.ih[i] = hosts[i];
        eq.endemic.iv[i] = vectors;
    }
    return eq;
}

PeriodicOrbit periodic_equilibrium_m2(const ModelParams& params, const SpatialDomain& domain,
                                      std::span<const double> hosts, const ImpulseSchedule& schedule, double dt,
                                      double cadence, SplittingScheme scheme, StageIntegrator stage) {
    const std::size_t n = domain.size();
    if (hosts.size() != n || schedule.vector_reset_profile.size() != n) {
        throw AnalysisError("field size does not match domain");
    }
    const long steps = whole_steps(schedule.period, dt, "impulse period");
    const long cadence_steps = whole_steps(cadence, dt, "cadence");
    const DiffusionSolver diffusion(domain, params, dt, {}, stage);
    const double theta = implicit_weight(stage);

    std::vector<double> rate(n);
    for (std::size_t i = 0; i < n; ++i) rate[i] = params.beta_h[i] * hosts[i];

    std::vector<double> sv = schedule.vector_reset_profile;
    std::vector<double> iv(n, 0.0);
    // The contact term is linear once I_h = N, so the implicit step is closed form.
    auto react = [&](double h) {
        for (std::size_t i = 0; i < n; ++i) {
            const double s = std::max(0.0, sv[i] * (1.0 - (1.0 - theta) * h * rate[i]) / (1.0 + theta * h * rate[i]));
            iv[i] += sv[i] - s;
            sv[i] = s;
        }
    };
    auto disperse = [&] {
        diffusion.step(sv);
        diffusion.step(iv);
        kernels::clamp_negative(sv);
        kernels::clamp_negative(iv);
    };

    PeriodicOrbit orbit;
    orbit.times.push_back(0.0);
    orbit.sv.push_back(sv);
    orbit.iv.push_back(iv);
    for (long k = 1; k <= steps; ++k) {
        if (scheme == SplittingScheme::kLie) {
            react(dt);
            disperse();
        } else {
            react(0.5 * dt);
            disperse();
            react(0.5 * dt);
        }
        if (k % cadence_steps == 0) {
            orbit.times.push_back(static_cast<double>(k) * dt);
            orbit.sv.push_back(sv);
            orbit.iv.push_back(iv);
        }
    }
    return orbit;
}

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Unit-weight graph Laplacian of the active cells plus diag(h^2 potential / D).
SparseMatrix stiffness(const SpatialDomain& domain, const std::vector<double>& d, std::span<const double> potential) {
    const std::size_t n = domain.size();
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(5 * n);
    const double area = domain.cell_area();
    for (std::size_t i = 0; i < n; ++i) {
        double degree = 0.0;
        for (int j : domain.neighbors(static_cast<int>(i))) {
            if (j >= 0) {
                entries.emplace_back(static_cast<int>(i), j, -1.0);
                degree += 1.0;
            }
        }
        entries.emplace_back(static_cast<int>(i), static_cast<int>(i), degree + area * potential[i] / d[i]);
    }
    SparseMatrix a(static_cast<int>(n), static_cast<int>(n));
    a.setFromTriplets(entries.begin(), entries.end());
    return a;
}

double mu_norm(const std::vector<double>& mass, const Eigen::VectorXd& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += mass[i] * v[i] * v[i];
    return std::sqrt(s);
}

} // namespace

double rayleigh_quotient(const SpatialDomain& domain, const CellCoefficient& diffusion,
                         std::span<const double> potential, std::span<const double> phi) {
    const std::size_t n = domain.size();
    const double area = domain.cell_area();
    double numerator = 0.0, denominator = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (int j : {domain.neighbors(static_cast<int>(i))[kEast], domain.neighbors(static_cast<int>(i))[kNorth]}) {
            if (j >= 0) {
                const double g = phi[i] - phi[j];
                numerator += g * g;
            }
        }
        const double w = area / diffusion[i];
        numerator += w * potential[i] * phi[i] * phi[i];
        denominator += w * phi[i] * phi[i];
    }
    return numerator / denominator;
}

SpectralResult principal_eigenvalue(const SpatialDomain& domain, const CellCoefficient& diffusion,
                                    std::span<const double> potential, const SpectralOptions& options) {
    const std::size_t n = domain.size();
    if (potential.size() != n) {
        throw AnalysisError("potential size does not match domain");
    }
    const std::vector<double> d = diffusion.expand(n);
    for (double v : d) {
        if (!(v > 0.0)) throw AnalysisError("nonpositive diffusion");
    }
    for (double v : potential) {
        if (!(v >= 0.0)) throw AnalysisError("potential must be nonnegative");
    }
    const double area = domain.cell_area();
    std::vector<double> mass(n);
    for (std::size_t i = 0; i < n; ++i) mass[i] = area / d[i];

    const SparseMatrix a = stiffness(domain, d, potential);
    // A small negative shift keeps the no-flux problem nonsingular when the
    // potential vanishes; it only changes the convergence ratio.
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, a.coeff(static_cast<int>(i), static_cast<int>(i)) / mass[i]);
    const double shift = 1e-8 * std::max(scale, 1.0);
    SparseMatrix shifted = a;
    for (std::size_t i = 0; i < n; ++i) shifted.coeffRef(static_cast<int>(i), static_cast<int>(i)) += shift * mass[i];
    Eigen::SimplicialLDLT<SparseMatrix> solver(shifted);
    if (solver.info() != Eigen::Success) {
        throw AnalysisError("eigensolver factorization failed");
    }

    Eigen::VectorXd phi = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    phi /= mu_norm(mass, phi);
    double lambda = phi.dot(a * phi);
    SpectralResult result;
    for (int it = 1; it <= options.max_iterations; ++it) {
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) rhs[i] = mass[i] * phi[i];
        Eigen::VectorXd next = solver.solve(rhs);
        next /= mu_norm(mass, next);
        const double next_lambda = next.dot(a * next);
        phi = next;
        const double change = std::abs(next_lambda - lambda);
        lambda = next_lambda;
        if (change < options.tolerance) {
            result.iterations = it;
            break;
        }
        if (it == options.max_iterations) {
            throw AnalysisError("eigensolver did not converge");
        }
    }
    if (phi.sum() < 0.0) phi = -phi;
    result.lambda_1 = lambda;
    result.phi_1.assign(phi.data(), phi.data() + phi.size());
    return result;
}

DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values, double tail_fraction) {
    if (times.size() != values.size()) {
        throw AnalysisError("time and value series differ in length");
    }
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
        throw AnalysisError("tail fraction must lie in (0, 1]");
    }
    const std::size_t total = times.size();
    const auto used = std::max<std::size_t>(
        std::min<std::size_t>(3, total),
        static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(total) - 1e-12)));
    if (used < 3) {
        throw AnalysisError("cannot log-fit: need at least 3 points");
    }
    const std::size_t first = total - used;
    std::vector<double> x(used), y(used);
    for (std::size_t k = 0; k < used; ++k) {
        const double v = values[first + k];
        if (!(v > 0.0)) {
            throw AnalysisError("cannot log-fit: nonpositive value");
        }
        x[k] = times[first + k];
        y[k] = std::log(v);
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(used);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(used);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < used; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (!(sxx > 0.0)) {
        throw AnalysisError("cannot log-fit: times are not distinct");
    }
    DecayFit fit;
    const double slope = sxy / sxx;
    fit.lambda = -slope;
    fit.points_used = used;
    // A constant series is fitted perfectly.
    fit.r_squared = syy > 1e-300 ? std::min(1.0, (sxy * sxy) / (sxx * syy)) : 1.0;
    return fit;
}

double sup_distance(const StateFields& a, const StateFields& b) {
    double worst = 0.0;
    for (Compartment c : {Compartment::kSh, Compartment::kEh, Compartment::kIh, Compartment::kSv, Compartment::kIv}) {
        const auto& fa = field(a, c);
        const auto& fb = field(b, c);
        for (std::size_t i = 0; i < fa.size(); ++i) worst = std::max(worst, std::abs(fa[i] - fb[i]));
    }
    return worst;
}

} // namespace vbsim

namespace vbsim {

double iv_spread_l2mu(const SpatialDomain& domain, const CellCoefficient& diffusion, std::span<const double> iv) {
    const std::size_t n = domain.size();
    const double area = domain.cell_area();
    double mass = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mass += area / diffusion[i];
        total += area * iv[i];  // integral of D I_v dmu
    }
    const double mean = total / mass;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dev = diffusion[i] * iv[i] - mean;
        s += area / diffusion[i] * dev * dev;
    }
    return std::sqrt(s);
}

OrbitComparison compare_final_period(const SimulationConfig& config, const PeriodicOrbit& orbit) {
    if (!config.impulse) {
        throw AnalysisError("orbit comparison needs an impulsive run");
    }
    const long period_steps = whole_steps(config.impulse->period, config.dt, "impulse period");
    const long total = whole_steps(config.t_end, config.dt, "t_end");
    if (total < period_steps || total % period_steps != 0) {
        throw AnalysisError("run must cover a whole number of periods");
    }
    if (orbit.sv.size() < static_cast<std::size_t>(period_steps)) {
        throw AnalysisError("orbit must be sampled at every time step");
    }
    const long first = total - period_steps;
    double diff = 0.0, norm = 0.0;
    std::size_t samples = 0;
    simulate_m2(config, [&](long step, double, const StateFields& s, bool) {
        if (step < first || step >= total) return;
        const auto phase = static_cast<std::size_t>(step - first);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double ds = s.sv[i] - orbit.sv[phase][i];
            const double di = s.iv[i] - orbit.iv[phase][i];
            diff += ds * ds + di * di;
            norm += orbit.sv[phase][i] * orbit.sv[phase][i] + orbit.iv[phase][i] * orbit.iv[phase][i];
        }
        ++samples;
    });
    return {norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff), samples};
}

} // namespace vbsim
