#include <doctest.h>

#include "vbsim/analysis.hpp"
#include "vbsim/error.hpp"
#include "vbsim/geometry.hpp"
#include "vbsim/scenarios.hpp"

#include <cmath>
#include <memory>
#include <numeric>

using namespace vbsim;

namespace {

std::shared_ptr<const SpatialDomain> square(double side, double h) {
    return std::make_shared<const SpatialDomain>(build_domain({{{0, 0}, {side, 0}, {side, side}, {0, side}}}, h));
}

std::shared_ptr<const SpatialDomain> arc(double h) {
    return std::make_shared<const SpatialDomain>(build_domain({mediterranean_arc()}, h));
}

// Hosts and vectors at 300, one infected vector seeded at `seed`.
SimulationConfig base_config(std::shared_ptr<const SpatialDomain> d, Point seed, double amount = 1.0) {
    SimulationConfig c;
    c.domain = d;
    c.initial = make_initial_state(*d, 300.0, 300.0, {{Compartment::kIv, seed, amount}});
    return c;
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double rel_linf(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / den;
}

} // namespace

TEST_CASE("disease-free start: hosts fixed, vectors relax toward uniform, no infection appears") {
    const auto d = square(1.0, 0.1);
    SimulationConfig c;
    c.domain = d;
    c.initial = StateFields::zeros(d->size());
    std::fill(c.initial.sh.begin(), c.initial.sh.end(), 300.0);
    for (std::size_t i = 0; i < d->size(); ++i) c.initial.sv[i] = 100.0 + 10.0 * static_cast<double>(i % 7);
    c.params.beta_v = 2.0;
    c.params.beta_h = 3.0;
    c.params.epsilon = 0.5;
    c.params.diffusion = 0.05;
    c.dt = 0.01;
    c.t_end = 2.0;
    c.cadence = 0.5;
    const Trajectory tr = simulate_m1(c);
    REQUIRE(tr.times.size() == 5);
    auto spread = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *hi - *lo;
    };
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
        const StateFields& s = tr.snapshots[k];
        CHECK(s.sh == c.initial.sh);
        CHECK(std::all_of(s.iv.begin(), s.iv.end(), [](double v) { return v == 0.0; }));
        CHECK(std::all_of(s.ih.begin(), s.ih.end(), [](double v) { return v == 0.0; }));
        if (k > 0) CHECK(spread(s.sv) < spread(tr.snapshots[k - 1].sv));
    }
}

TEST_CASE("infected hosts reach the 300 plateau in the long run") {
    const auto d = arc(60.0);
    SimulationConfig c = base_config(d, mediterranean_arc_introduction());
    c.params.beta_v = 15.0;
    c.params.beta_h = 15.0;
    c.params.epsilon = 0.02;
    c.params.diffusion = 7502.5;
    c.dt = 0.01;
    c.t_end = 500.0;
    c.cadence = 10.0;
    const Trajectory tr = simulate_m1(c);
    const StateFields& last = tr.snapshots.back();
    for (double v : last.ih) CHECK(v > 299.0);
    for (double v : last.ih) CHECK(v <= 300.0 + 1e-9);

    // Distance to the endemic state decays at a positive fitted rate.
    const double c_star = tr.ledger.front().vector_integral;
    const EquilibriumPair eq = equilibria_m1(c.params, *d, tr.host_reference, c_star);
    std::vector<double> dist;
    for (const StateFields& s : tr.snapshots) dist.push_back(sup_distance(s, eq.endemic));
    const DecayFit fit = fit_decay_rate(tr.times, dist);
    CHECK(fit.lambda > 0.0);
    CHECK(dist.back() < dist[dist.size() / 2]);
    CHECK(tr.diagnostics.max_host_deviation < 1e-8);
    CHECK(tr.diagnostics.max_vector_step_drift < 1e-8);
    CHECK(tr.diagnostics.max_vector_drift_since_reset < 1e-6);
}

TEST_CASE("impulsive model resets vectors exactly and leaves hosts continuous") {
    const auto d = arc(40.0);
    SimulationConfig c = base_config(d, mediterranean_arc_introduction(), 5.0);
    c.params.beta_v = 10.0;
    c.params.beta_h = 10.0;
    c.params.epsilon = 0.2;
    c.params.diffusion = 2000.0;
    c.dt = 0.01;
    c.t_end = 5.0;
    c.cadence = 1.0;
    c.impulse = ImpulseSchedule{1.0, std::vector<double>(d->size(), 300.0)};
    long impulses = 0;
    const Trajectory tr = simulate_m2(c, [&](long, double, const StateFields& s, bool applied) {
        if (!applied) return;
        ++impulses;
        CHECK(s.sv == c.impulse->vector_reset_profile);
        CHECK(std::all_of(s.iv.begin(), s.iv.end(), [](double v) { return v == 0.0; }));
    });
    CHECK(impulses == 5);
    for (std::size_t k = 1; k < tr.snapshots.size(); ++k) {
        CHECK(tr.ledger[k].vector_integral == doctest::Approx(300.0 * d->cell_area() * d->size()).epsilon(1e-14));
    }
    CHECK(tr.diagnostics.max_vector_drift_since_reset < 1e-8);
    CHECK(tr.diagnostics.max_host_deviation < 1e-8);

    // Hosts right after the first impulse equal the hosts of the same run without impulses.
    SimulationConfig m1 = c;
    m1.impulse.reset();
    m1.t_end = 1.0;
    const Trajectory one_year = simulate_m1(m1);
    CHECK(one_year.snapshots.back().sh == tr.snapshots[1].sh);
    CHECK(one_year.snapshots.back().eh == tr.snapshots[1].eh);
    CHECK(one_year.snapshots.back().ih == tr.snapshots[1].ih);
}

TEST_CASE("without infection every year repeats the first one") {
    const auto d = arc(40.0);
    SimulationConfig c;
    c.domain = d;
    c.initial = make_initial_state(*d, 300.0, 0.0, {});
    std::vector<double> profile(d->size());
    for (std::size_t i = 0; i < profile.size(); ++i) profile[i] = 50.0 + 3.0 * static_cast<double>(i % 11);
    c.initial.sv = profile;
    c.params.beta_v = 10.0;
    c.params.beta_h = 10.0;
    c.params.epsilon = 0.02;
    c.params.diffusion = 3000.0;
    c.dt = 0.05;
    c.t_end = 3.0;
    c.cadence = 1.0;
    c.impulse = ImpulseSchedule{1.0, profile};
    std::vector<std::vector<double>> year_one;
    const long per_year = 20;
    simulate_m2(c, [&](long k, double, const StateFields& s, bool) {
        const long phase = (k - 1) % per_year;
        if (k <= per_year) {
            year_one.push_back(s.sv);
        } else {
            CHECK(s.sv == year_one[static_cast<std::size_t>(phase)]);
            CHECK(std::all_of(s.iv.begin(), s.iv.end(), [](double v) { return v == 0.0; }));
        }
    });
    CHECK(year_one.size() == per_year);
}

TEST_CASE("mid-range parameters: host infection grows every year and spreads outward") {
    const auto d = arc(25.0);
    const Point intro = mediterranean_arc_introduction();
    SimulationConfig c = base_config(d, intro);
    c.params.beta_v = 15.0;
    c.params.beta_h = 15.0;
    c.params.epsilon = 0.02;
    c.params.diffusion = 7502.5;
    c.dt = 0.01;
    c.t_end = 20.0;
    c.cadence = 1.0;
    c.impulse = ImpulseSchedule{1.0, std::vector<double>(d->size(), 300.0)};
    const Trajectory tr = simulate_m2(c);
    for (std::size_t k = 1; k < tr.snapshots.size(); ++k) {
        for (std::size_t i = 0; i < d->size(); ++i) {
            CHECK(tr.snapshots[k].ih[i] >= tr.snapshots[k - 1].ih[i] - 1e-12);
        }
    }
    // At every year the near band is ahead of the far band.
    std::vector<double> dist(d->size());
    for (std::size_t i = 0; i < d->size(); ++i) dist[i] = distance(d->center(static_cast<int>(i)), intro);
    const double far = *std::max_element(dist.begin(), dist.end());
    for (std::size_t k = 1; k < tr.snapshots.size(); ++k) {
        double bands[3] = {0, 0, 0};
        int counts[3] = {0, 0, 0};
        for (std::size_t i = 0; i < d->size(); ++i) {
            const int b = std::min(2, static_cast<int>(3.0 * dist[i] / far));
            bands[b] += tr.snapshots[k].ih[i];
            ++counts[b];
        }
        for (int b = 0; b < 3; ++b) bands[b] /= counts[b];
        CHECK(bands[0] > bands[1]);
        CHECK(bands[1] > bands[2]);
    }
}

TEST_CASE("identical configurations give bit-identical trajectories") {
    const auto d = arc(40.0);
    SimulationConfig c = base_config(d, mediterranean_arc_introduction());
    c.params.beta_v = 12.0;
    c.params.beta_h = 8.0;
    c.params.epsilon = 0.02;
    c.params.diffusion = 500.0;
    c.t_end = 3.0;
    c.impulse = ImpulseSchedule{1.0, std::vector<double>(d->size(), 300.0)};
    const Trajectory a = simulate(c);
    const Trajectory b = simulate(c);
    CHECK(a.times == b.times);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) CHECK(a.snapshots[k] == b.snapshots[k]);
}

TEST_CASE("configuration errors") {
    const auto d = square(1.0, 0.25);
    SimulationConfig c = base_config(d, {0.5, 0.5});
    c.params.epsilon = 0.1;
    c.t_end = 1.0;
    c.dt = 0.03;
    CHECK_THROWS_AS(simulate(c), SolverError);
    c.dt = 0.01;
    c.cadence = 0.3;
    CHECK_THROWS_WITH_AS(simulate(c), "cadence does not divide t_end", SolverError);
    c.cadence = 0.255;
    CHECK_THROWS_WITH_AS(simulate(c), "cadence is not a whole multiple of the time step", SolverError);
    c.cadence = 0.25;
    c.impulse = ImpulseSchedule{0.125, std::vector<double>(d->size(), 1.0)};
    CHECK_THROWS_AS(simulate(c), SolverError);
    CHECK_THROWS_AS(simulate_m1(c), SolverError);
    c.impulse.reset();
    CHECK_THROWS_AS(simulate_m2(c), SolverError);
    CHECK_THROWS_WITH_AS(make_initial_state(*d, 1.0, 1.0, {{Compartment::kIv, {5, 5}, 1.0}}),
                         "introduction point outside domain", SolverError);
}

TEST_CASE("reduced model: coupling envelope, conserved total and agreement with the full system") {
    const auto d = square(1.0, 0.1);
    SimulationConfig c;
    c.domain = d;
    c.initial = make_initial_state(*d, 300.0, 300.0, {{Compartment::kIv, {0.25, 0.35}, 2.0},
                                                      {Compartment::kIh, {0.75, 0.65}, 30.0}});
    c.params.beta_v = 2e-3;
    c.params.beta_h = 1e-3;
    c.params.epsilon = 0.2;
    c.params.diffusion = 0.02;
    c.dt = 0.005;
    c.t_end = 10.0;
    c.cadence = 0.5;
    const ReducedTrajectory red = simulate_reduced(c);
    const Trajectory full = simulate_m1(c);
    REQUIRE(red.times == full.times);

    const double area = d->cell_area();
    const double a0 = std::accumulate(red.a.front().begin(), red.a.front().end(), 0.0) * area;
    const double dval = 0.02;
    for (std::size_t k = 0; k < red.times.size(); ++k) {
        for (std::size_t i = 0; i < d->size(); ++i) {
            const double cap = 300.0 * 1e-3;
            // Slack covers the trapezoid quadrature of the memory term.
            CHECK(red.f[k][i] >= cap * (red.initial_infected_fraction[i] - 1e-8));
            CHECK(red.f[k][i] <= cap * (1.0 + 1e-8));
        }
        const double ak = std::accumulate(red.a[k].begin(), red.a[k].end(), 0.0) * area;
        CHECK(std::abs(ak - a0) < 1e-10 * a0);

        std::vector<double> rescaled(d->size());
        for (std::size_t i = 0; i < d->size(); ++i) rescaled[i] = dval * full.snapshots[k].iv[i];
        CHECK(rel_linf(red.iv[k], rescaled) < 1e-2);
    }
}

TEST_CASE("reduced model rejects the impulsive setting") {
    const auto d = square(1.0, 0.5);
    SimulationConfig c = base_config(d, {0.5, 0.5});
    c.impulse = ImpulseSchedule{1.0, std::vector<double>(d->size(), 1.0)};
    CHECK_THROWS_AS(simulate_reduced(c), SolverError);
}
