// Serial reference against OpenMP kernels on problem sizes typical of a run.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "srcimg/kernels.hpp"

namespace {

using namespace srcimg::kernels;

struct Setup {
    Nodes nodes;
    std::vector<double> dx, dy, xs, ys, s, table;
    std::vector<cplx> coeffs;

    Setup(size_t n, size_t dirs, size_t M, size_t grid) {
        std::mt19937_64 eng(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (size_t i = 0; i < n; ++i) {
            nodes.x.push_back(u(eng));
            nodes.y.push_back(u(eng));
            nodes.w.emplace_back(1e-4, 0.0);
        }
        for (size_t d = 0; d < dirs; ++d) {
            const double a = std::numbers::pi * static_cast<double>(d) / static_cast<double>(dirs);
            dx.push_back(std::cos(a));
            dy.push_back(std::sin(a));
        }
        for (size_t p = 0; p < grid; ++p) xs.push_back(-3.0 + 6.0 * static_cast<double>(p) / static_cast<double>(grid - 1));
        ys = xs;
        for (int j = -1700; j <= 1700; ++j) s.push_back(j * 0.0025);
        for (size_t i = 0; i < dirs * M; ++i) coeffs.emplace_back(u(eng), u(eng));
        table.resize(dirs * s.size());
        for (auto& v : table) v = u(eng);
    }
};

const Setup& setup() {
    static const Setup s(20000, 15, 60, 601);
    return s;
}

template <bool Parallel>
void BM_synthesize(benchmark::State& st) {
    const auto& s = setup();
    SynthesisTask t{&s.nodes, &s.dx, &s.dy, 60, 0.5};
    std::vector<cplx> out;
    for (auto _ : st) {
        out.assign(s.dx.size() * t.M, cplx{});
        if constexpr (Parallel) omp::synthesize(t, out); else serial::synthesize(t, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_band_sum(benchmark::State& st) {
    const auto& s = setup();
    BandSumTask t{&s.coeffs, s.dx.size(), 60, 0.5, &s.s, 1.0};
    std::vector<cplx> out;
    for (auto _ : st) {
        if constexpr (Parallel) omp::band_sum(t, out); else serial::band_sum(t, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_broadcast(benchmark::State& st) {
    const auto& s = setup();
    BroadcastTask t{&s.table, s.dx.size(), s.s.size(), s.s.front(), 0.0025, &s.dx, &s.dy, &s.xs, &s.ys};
    std::vector<double> field;
    for (auto _ : st) {
        field.assign(s.xs.size() * s.ys.size(), 0.0);
        if constexpr (Parallel) omp::broadcast_sum(t, field); else serial::broadcast_sum(t, field);
        benchmark::DoNotOptimize(field.data());
    }
}

}  // namespace

BENCHMARK(BM_synthesize<false>)->Name("synthesize/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_synthesize<true>)->Name("synthesize/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_band_sum<false>)->Name("band_sum/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_band_sum<true>)->Name("band_sum/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_broadcast<false>)->Name("broadcast_sum/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_broadcast<true>)->Name("broadcast_sum/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
