#include <doctest.h>

#include "vbsim/diffusion.hpp"
#include "vbsim/error.hpp"
#include "vbsim/geometry.hpp"
#include "vbsim/reaction.hpp"
#include "vbsim/splitting.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <random>

using namespace vbsim;

namespace {

using Vec = std::array<double, 5>;

Vec rhs(const Vec& x, double bv, double bh, double eps) {
    const double inf_h = bv * x[0] * x[4];
    const double inf_v = bh * x[3] * x[2];
    return {-inf_h, inf_h - eps * x[1], eps * x[1], -inf_v, inf_v};
}

// Dormand-Prince 5(4) with embedded error control.
Vec dormand_prince(Vec x, double t_end, const std::function<Vec(const Vec&)>& f, double rtol) {
    static const double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1, 1};
    static const double a[7][6] = {{},
                                   {1.0 / 5},
                                   {3.0 / 40, 9.0 / 40},
                                   {44.0 / 45, -56.0 / 15, 32.0 / 9},
                                   {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
                                   {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
                                   {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double b5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
    static const double b4[7] = {5179.0 / 57600, 0,  7571.0 / 16695, 393.0 / 640, -92097.0 / 339200,
                                 187.0 / 2100,   1.0 / 40};
    (void)c;
    double t = 0.0;
    double h = 1e-3;
    while (t < t_end) {
        h = std::min(h, t_end - t);
        Vec k[7];
        for (int s = 0; s < 7; ++s) {
            Vec y = x;
            for (int j = 0; j < s; ++j) {
                for (int q = 0; q < 5; ++q) y[q] += h * a[s][j] * k[j][q];
            }
            k[s] = f(y);
        }
        Vec y5 = x;
        double err = 0.0;
        for (int q = 0; q < 5; ++q) {
            double d = 0.0;
            for (int s = 0; s < 7; ++s) {
                y5[q] += h * b5[s] * k[s][q];
                d += h * (b5[s] - b4[s]) * k[s][q];
            }
            err = std::max(err, std::abs(d) / (1e-12 + rtol * std::abs(y5[q])));
        }
        if (err <= 1.0) {
            t += h;
            x = y5;
        }
        h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    }
    return x;
}

StateFields single_cell(Vec v) {
    StateFields s = StateFields::zeros(1);
    s.sh[0] = v[0];
    s.eh[0] = v[1];
    s.ih[0] = v[2];
    s.sv[0] = v[3];
    s.iv[0] = v[4];
    return s;
}

Vec cell(const StateFields& s, std::size_t i) { return {s.sh[i], s.eh[i], s.ih[i], s.sv[i], s.iv[i]}; }

SpatialDomain square(double side, double h) { return build_domain({{{0, 0}, {side, 0}, {side, side}, {0, side}}}, h); }

StateFields random_state(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 300.0);
    StateFields s = StateFields::zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.sh[i] = u(rng);
        s.eh[i] = u(rng) / 3;
        s.ih[i] = u(rng) / 3;
        s.sv[i] = u(rng);
        s.iv[i] = u(rng) / 10;
    }
    return s;
}

double integral(const std::vector<double>& v, double area) {
    double s = 0.0;
    for (double x : v) s += x * area;
    return s;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / den;
}

} // namespace

TEST_CASE("disease-free state is a fixed point of the reaction step") {
    std::mt19937_64 rng(1);
    StateFields s = random_state(50, rng);
    std::fill(s.eh.begin(), s.eh.end(), 0.0);
    std::fill(s.ih.begin(), s.ih.end(), 0.0);
    std::fill(s.iv.begin(), s.iv.end(), 0.0);
    ModelParams p;
    p.beta_v = 0.5;
    p.beta_h = 0.7;
    p.epsilon = 0.3;
    CHECK(reaction_step(s, p, 0.1) == s);
}

TEST_CASE("without vector-to-host contact the host compartments stay put") {
    std::mt19937_64 rng(2);
    StateFields s = random_state(20, rng);
    std::fill(s.eh.begin(), s.eh.end(), 0.0);
    ModelParams p;
    p.beta_v = 0.0;
    p.beta_h = 0.01;
    p.epsilon = 0.2;
    const StateFields out = reaction_step(s, p, 0.5);
    CHECK(out.sh == s.sh);
    CHECK(out.ih == s.ih);
    CHECK(out.eh == s.eh);
}

TEST_CASE("single-cell reaction run matches an adaptive Dormand-Prince reference") {
    const Vec x0{300, 0, 0, 300, 1};
    const double beta = 1e-3;
    const double eps = 0.02;
    const double dt = 0.01;
    ModelParams p;
    p.beta_v = beta;
    p.beta_h = beta;
    p.epsilon = eps;
    StateFields s = single_cell(x0);
    for (int k = 0; k < 1000; ++k) reaction_step_in_place(s, p, dt);
    const Vec ref = dormand_prince(x0, 1000 * dt, [&](const Vec& x) { return rhs(x, beta, beta, eps); }, 1e-12);
    const Vec got = cell(s, 0);
    double err = 0.0;
    double scale = 0.0;
    for (int q = 0; q < 5; ++q) {
        err = std::max(err, std::abs(got[q] - ref[q]));
        scale = std::max(scale, std::abs(ref[q]));
    }
    MESSAGE("implicit-Euler relative error " << err / scale);
    CHECK(err / scale < 1e-4);

    // The trapezoidal stage is second order: same run, much closer.
    StateFields t = single_cell(x0);
    for (int k = 0; k < 1000; ++k) reaction_step_in_place(t, p, dt, {}, nullptr, StageIntegrator::kTrapezoidal);
    double err2 = 0.0;
    for (int q = 0; q < 5; ++q) err2 = std::max(err2, std::abs(cell(t, 0)[q] - ref[q]));
    CHECK(err2 / scale < 1e-6);
}

TEST_CASE("reaction step conserves per-cell totals, is monotone and nonnegative") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const StateFields s = random_state(30, rng);
        ModelParams p;
        std::uniform_real_distribution<double> u(0.0, 0.05);
        p.beta_v = u(rng);
        p.beta_h = u(rng);
        p.epsilon = 0.01 + 10 * u(rng);
        const double dt = trial % 2 ? 0.01 : 1.0;
        double clamped = 0.0;
        StateFields out = s;
        reaction_step_in_place(out, p, dt, {}, &clamped);
        CHECK(clamped == 0.0);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double n = s.sh[i] + s.eh[i] + s.ih[i];
            CHECK(std::abs(out.sh[i] + out.eh[i] + out.ih[i] - n) < 1e-8 * n);
            const double v = s.sv[i] + s.iv[i];
            CHECK(std::abs(out.sv[i] + out.iv[i] - v) < 1e-8 * v);
            CHECK(out.sh[i] <= s.sh[i] + 1e-12);
            CHECK(out.ih[i] >= s.ih[i] - 1e-12);
            for (Compartment c : {Compartment::kSh, Compartment::kEh, Compartment::kIh, Compartment::kSv,
                                  Compartment::kIv}) {
                CHECK(field(out, c)[i] >= 0.0);
            }
        }
    }
}

TEST_CASE("Newton failure names the offending cell") {
    StateFields s = StateFields::zeros(5);
    std::fill(s.sh.begin(), s.sh.end(), 300.0);
    std::fill(s.sv.begin(), s.sv.end(), 300.0);
    s.iv[3] = 5.0;
    ModelParams p;
    p.beta_v = 0.1;
    p.beta_h = 0.1;
    p.epsilon = 0.5;
    NewtonOptions tight;
    tight.max_iterations = 1;
    CHECK_THROWS_WITH_AS(reaction_step(s, p, 1.0, tight), doctest::Contains("reaction solver diverged at cell 3"),
                         SolverError);
}

TEST_CASE("uniform fields are unchanged by dispersal in both formulations") {
    const SpatialDomain d = build_domain({mediterranean_arc()}, 25.0);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(1.0, 100.0);
    std::vector<double> dfield(d.size());
    for (double& v : dfield) v = u(rng);
    const std::vector<double> flat(d.size(), 42.0);

    ModelParams fick;
    fick.formulation = Formulation::kFickian;
    fick.diffusion = CellCoefficient(dfield);
    for (double v : diffusion_step(d, flat, fick, 0.5)) CHECK(v == doctest::Approx(42.0).epsilon(1e-10));

    ModelParams nonfick;
    nonfick.diffusion = 7.0;
    for (double v : diffusion_step(d, flat, nonfick, 0.5)) CHECK(v == doctest::Approx(42.0).epsilon(1e-10));
}

TEST_CASE("dispersal conserves the integral and keeps densities nonnegative") {
    const SpatialDomain d = build_domain({mediterranean_arc()}, 20.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Formulation f : {Formulation::kNonFickian, Formulation::kFickian}) {
        for (int trial = 0; trial < 4; ++trial) {
            std::vector<double> field(d.size(), 0.0);
            for (double& v : field) v = u(rng) < 0.1 ? 1000 * u(rng) : 0.0;
            field[0] += 1.0;
            std::vector<double> dvals(d.size());
            for (double& v : dvals) v = 5.0 + 15000 * u(rng);
            ModelParams p;
            p.formulation = f;
            p.diffusion = trial % 2 ? CellCoefficient(dvals) : CellCoefficient(300.0);
            const auto out = diffusion_step(d, field, p, 0.01);
            const double before = integral(field, d.cell_area());
            CHECK(std::abs(integral(out, d.cell_area()) - before) < 1e-10 * before);
            for (double v : out) CHECK(v >= -1e-12 * before);
        }
    }
}

TEST_CASE("Gaussian bump follows the analytic heat kernel") {
    const double sigma = 0.2;
    const double diff = 0.1;
    const double h = sigma / 10;
    const SpatialDomain d = build_domain({{{-1.5, -1.5}, {1.5, -1.5}, {1.5, 1.5}, {-1.5, 1.5}}}, h);
    std::vector<double> u(d.size());
    auto exact = [&](Point p, double t) {
        const double s2 = sigma * sigma + 2 * diff * t;
        return sigma * sigma / s2 * std::exp(-(p.x * p.x + p.y * p.y) / (2 * s2));
    };
    for (std::size_t i = 0; i < d.size(); ++i) u[i] = exact(d.center(static_cast<int>(i)), 0.0);
    ModelParams p;
    p.diffusion = diff;
    const double dt = 1e-3;
    const DiffusionSolver solver(d, p, dt);
    for (int k = 0; k < 100; ++k) solver.step(u);
    std::vector<double> ref(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) ref[i] = exact(d.center(static_cast<int>(i)), 0.1);
    const double err = max_rel_diff(u, ref);
    MESSAGE("heat-kernel relative error " << err);
    CHECK(err < 1e-2);
}

TEST_CASE("formulations agree for constant diffusion") {
    const SpatialDomain d = build_domain({mediterranean_arc()}, 20.0);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    std::vector<double> field(d.size());
    for (double& v : field) v = u(rng);
    ModelParams a;
    a.diffusion = 800.0;
    ModelParams b = a;
    b.formulation = Formulation::kFickian;
    const auto ua = diffusion_step(d, field, a, 0.05);
    const auto ub = diffusion_step(d, field, b, 0.05);
    CHECK(max_rel_diff(ua, ub) < 1e-10);
}

TEST_CASE("stalled linear solve is reported") {
    const SpatialDomain d = square(1.0, 0.1);
    std::vector<double> field(d.size(), 0.0);
    field[55] = 100.0;
    ModelParams p;
    p.diffusion = 1.0;
    DiffusionOptions o;
    o.max_iterations = 1;
    CHECK_THROWS_WITH_AS(diffusion_step(d, field, p, 0.1, o), doctest::Contains("diffusion solve failed"), SolverError);
}

TEST_CASE("split step on a single cell equals the reaction step") {
    const SpatialDomain d = square(1.0, 1.0);
    REQUIRE(d.size() == 1);
    const StateFields s = single_cell({300, 10, 5, 300, 20});
    ModelParams p;
    p.beta_v = 1e-3;
    p.beta_h = 2e-3;
    p.epsilon = 0.1;
    p.diffusion = 50.0;
    CHECK(max_rel_diff(split_step(d, s, p, 0.1, SplittingScheme::kLie).iv, reaction_step(s, p, 0.1).iv) < 1e-12);
    StateFields strang = reaction_step(reaction_step(s, p, 0.05), p, 0.05);
    const StateFields got = split_step(d, s, p, 0.1, SplittingScheme::kStrang);
    for (Compartment c : {Compartment::kSh, Compartment::kEh, Compartment::kIh, Compartment::kSv, Compartment::kIv}) {
        CHECK(max_rel_diff(field(got, c), field(strang, c)) < 1e-12);
    }
}

TEST_CASE("without contacts the split step is pure dispersal") {
    const SpatialDomain d = build_domain({mediterranean_arc()}, 25.0);
    std::mt19937_64 rng(7);
    StateFields s = random_state(d.size(), rng);
    std::fill(s.eh.begin(), s.eh.end(), 0.0);
    ModelParams p;
    p.diffusion = 1000.0;
    p.epsilon = 0.3;
    for (SplittingScheme scheme : {SplittingScheme::kLie, SplittingScheme::kStrang}) {
        const StateFields out = split_step(d, s, p, 0.01, scheme);
        CHECK(out.sh == s.sh);
        CHECK(out.eh == s.eh);
        CHECK(out.ih == s.ih);
        CHECK(max_rel_diff(out.sv, diffusion_step(d, s.sv, p, 0.01)) < 1e-12);
        CHECK(max_rel_diff(out.iv, diffusion_step(d, s.iv, p, 0.01)) < 1e-12);
    }
}

TEST_CASE("split steps keep the conservation, monotonicity and sign properties") {
    const SpatialDomain d = build_domain({mediterranean_arc()}, 20.0);
    std::mt19937_64 rng(8);
    StateFields s = random_state(d.size(), rng);
    ModelParams p;
    p.beta_v = 0.01;
    p.beta_h = 0.02;
    p.epsilon = 0.5;
    std::vector<double> dvals(d.size());
    std::uniform_real_distribution<double> u(5.0, 15000.0);
    for (double& v : dvals) v = u(rng);
    p.diffusion = CellCoefficient(dvals);
    const std::vector<double> hosts = s.host_totals();
    const double c_star = s.vector_integral(d.cell_area());
    const SplitStepper stepper(d, p, 0.01);
    for (int k = 0; k < 50; ++k) {
        const StateFields before = s;
        stepper.step(s);
        const double vi = s.vector_integral(d.cell_area());
        CHECK(std::abs(vi - before.vector_integral(d.cell_area())) < 1e-8 * c_star);
        for (std::size_t i = 0; i < d.size(); ++i) {
            CHECK(std::abs(s.sh[i] + s.eh[i] + s.ih[i] - hosts[i]) < 1e-8 * hosts[i]);
            CHECK(s.sh[i] <= before.sh[i] + 1e-12);
            CHECK(s.ih[i] >= before.ih[i] - 1e-12);
            CHECK(s.sv[i] >= 0.0);
            CHECK(s.iv[i] >= 0.0);
            CHECK(s.eh[i] >= 0.0);
        }
    }
}

namespace {

// Observed order log2(e(dt) / e(dt/2)), both measured against a dt/8 run.
double observed_order(SplittingScheme scheme, StageIntegrator stage) {
    const SpatialDomain d = square(1.0, 0.1);
    StateFields s0 = StateFields::zeros(d.size());
    std::fill(s0.sh.begin(), s0.sh.end(), 300.0);
    std::fill(s0.sv.begin(), s0.sv.end(), 300.0);
    s0.iv[static_cast<std::size_t>(d.cell_at(2, 3))] = 1.0;
    ModelParams p;
    p.beta_v = 1e-3;
    p.beta_h = 1e-3;
    p.epsilon = 0.02;
    p.diffusion = 0.02;
    const double t_end = 2.0;
    auto run = [&](double dt) {
        StateFields s = s0;
        const SplitStepper stepper(d, p, dt, scheme, {}, {}, stage);
        const long n = std::lround(t_end / dt);
        for (long k = 0; k < n; ++k) stepper.step(s);
        return s;
    };
    const double dt = 0.1;
    const StateFields ref = run(dt / 8);
    auto error = [&](const StateFields& s) {
        double e = 0.0;
        for (Compartment c : {Compartment::kEh, Compartment::kIh, Compartment::kIv}) {
            e = std::max(e, max_rel_diff(field(s, c), field(ref, c)));
        }
        return e;
    };
    const double e1 = error(run(dt));
    const double e2 = error(run(dt / 2));
    return std::log2(e1 / e2);
}

} // namespace

TEST_CASE("observed splitting orders") {
    // Errors against a dt/8 reference bias the estimate up: ratio 7/3 for
    // order one, 63/15 for order two.
    const double lie = observed_order(SplittingScheme::kLie, StageIntegrator::kImplicitEuler);
    const double strang_ie = observed_order(SplittingScheme::kStrang, StageIntegrator::kImplicitEuler);
    const double strang_tr = observed_order(SplittingScheme::kStrang, StageIntegrator::kTrapezoidal);
    const double lie_tr = observed_order(SplittingScheme::kLie, StageIntegrator::kTrapezoidal);
    MESSAGE("lie " << lie << " strang/ie " << strang_ie << " strang/trap " << strang_tr << " lie/trap " << lie_tr);
    CHECK(lie == doctest::Approx(std::log2(7.0 / 3.0)).epsilon(0.15));
    CHECK(lie_tr == doctest::Approx(std::log2(7.0 / 3.0)).epsilon(0.15));
    CHECK(strang_tr == doctest::Approx(std::log2(63.0 / 15.0)).epsilon(0.1));
    // Implicit-Euler stages cap Strang at first order.
    CHECK(strang_ie < 1.5);
}

TEST_CASE("stiff contact rates at the sensitivity-analysis scale stay physical") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> beta(5.0, 25.0);
    for (double dt : {0.005, 0.01, 0.5}) {
        for (int trial = 0; trial < 10; ++trial) {
            const StateFields s = random_state(40, rng);
            ModelParams p;
            p.beta_v = beta(rng);
            p.beta_h = beta(rng);
            p.epsilon = 0.02;
            double clamped = 0.0;
            StateFields out = s;
            reaction_step_in_place(out, p, dt, {}, &clamped);
            CHECK(clamped == 0.0);
            for (std::size_t i = 0; i < s.size(); ++i) {
                const double n = s.sh[i] + s.eh[i] + s.ih[i];
                CHECK(std::abs(out.sh[i] + out.eh[i] + out.ih[i] - n) < 1e-8 * n);
                CHECK(std::abs(out.sv[i] + out.iv[i] - s.sv[i] - s.iv[i]) < 1e-8 * (s.sv[i] + s.iv[i]));
                CHECK(out.sh[i] <= s.sh[i] + 1e-12);
                CHECK(out.ih[i] >= s.ih[i] - 1e-12);
            }
        }
    }
}
