// Serial reference kernels against their OpenMP versions on square grids.

#include "vbsim/geometry.hpp"
#include "vbsim/kernels.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

vbsim::SpatialDomain square(int side) {
    return vbsim::SpatialDomain(side, side, 1.0, {0.0, 0.0},
                                std::vector<unsigned char>(static_cast<std::size_t>(side) * side, 1));
}

vbsim::StencilOperator stencil(const vbsim::SpatialDomain& d) {
    const std::vector<double> mass(d.size(), 1.0);
    return vbsim::make_stencil(d, mass, 0.5, {});
}

vbsim::StateFields state(std::size_t n) {
    vbsim::StateFields s = vbsim::StateFields::zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.sh[i] = 300.0 - static_cast<double>(i % 7);
        s.ih[i] = static_cast<double>(i % 7);
        s.sv[i] = 300.0;
        s.iv[i] = static_cast<double>(i % 3);
    }
    return s;
}

vbsim::ModelParams params() {
    vbsim::ModelParams p;
    p.beta_v = 1e-3;
    p.beta_h = 1e-3;
    p.epsilon = 0.5;
    return p;
}

template <bool Parallel>
void BM_Apply(benchmark::State& st) {
    const auto d = square(static_cast<int>(st.range(0)));
    const auto op = stencil(d);
    std::vector<double> x(d.size(), 1.0), y(d.size());
    for (auto _ : st) {
        if constexpr (Parallel) {
            vbsim::kernels::apply(op, x, y);
        } else {
            vbsim::kernels::serial::apply(op, x, y);
        }
        benchmark::DoNotOptimize(y.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(d.size()));
}

template <bool Parallel>
void BM_Dot(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0)) * st.range(0);
    std::vector<double> x(n, 0.5), y(n, 2.0);
    for (auto _ : st) {
        double s = Parallel ? vbsim::kernels::dot(x, y) : vbsim::kernels::serial::dot(x, y);
        benchmark::DoNotOptimize(s);
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(n));
}

template <bool Parallel>
void BM_Reaction(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0)) * st.range(0);
    const auto p = params();
    const auto initial = state(n);
    for (auto _ : st) {
        st.PauseTiming();
        auto s = initial;
        st.ResumeTiming();
        long failed = Parallel ? vbsim::kernels::reaction(s, p, 0.01, {}) : vbsim::kernels::serial::reaction(s, p, 0.01, {});
        benchmark::DoNotOptimize(failed);
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(n));
}

} // namespace

BENCHMARK(BM_Apply<false>)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_Apply<true>)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_Dot<false>)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_Dot<true>)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_Reaction<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_Reaction<true>)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
