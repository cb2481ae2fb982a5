#include <benchmark/benchmark.h>

#include "sepmel/melnikov.hpp"
#include "sepmel/strobe.hpp"
#include "sepmel/variational.hpp"

using namespace sepmel;

static void BM_MelnikovCoefficient(benchmark::State& state) {
    PlanarSystem sys = make_preset("duffing1", {1.0, 0.0, 1.0});
    Orbit orbit = closed_form_orbit("duffing1");
    for (auto _ : state) {
        auto [m, e] = melnikov_coefficient(orbit, sys, 1, 1e-10);
        benchmark::DoNotOptimize(m);
    }
}
BENCHMARK(BM_MelnikovCoefficient);

static void BM_Strobe(benchmark::State& state) {
    PlanarSystem sys = make_preset("duffing1", {1.0, 0.0, 1.0});
    StrobeMap map{sys, 1e-3, 0.3};
    Vec2 x{1.0, 0.2};
    for (auto _ : state) {
        Vec2 y = strobe(map, x);
        benchmark::DoNotOptimize(y);
    }
}
BENCHMARK(BM_Strobe);

static void BM_ShootSeparatrix(benchmark::State& state) {
    PlanarSystem sys = make_preset("duffing1", {});
    Saddle s = refine_saddle(sys, {0.05, 0.0});
    for (auto _ : state) {
        Orbit o = shoot_separatrix(sys, s, s);
        benchmark::DoNotOptimize(o.t_grid_hi());
    }
}
BENCHMARK(BM_ShootSeparatrix)->Unit(benchmark::kMillisecond);

static void BM_ConnectionMatrices(benchmark::State& state) {
    PlanarSystem sys = make_preset("duffing1", {});
    Orbit orbit = closed_form_orbit("duffing1");
    for (auto _ : state) {
        ConnectionMatrices cm = connection_matrices(sys, orbit);
        benchmark::DoNotOptimize(cm.B0);
    }
}
BENCHMARK(BM_ConnectionMatrices)->Unit(benchmark::kMillisecond);

static void BM_MonodromyContinuation(benchmark::State& state) {
    PlanarSystem sys = make_preset("duffing1", {1.0, 0.0, 1.0});
    Orbit orbit = closed_form_orbit("duffing1");
    for (auto _ : state) {
        CMat3 m = monodromy_via_continuation(sys, orbit, 1, -1);
        benchmark::DoNotOptimize(m);
    }
}
BENCHMARK(BM_MonodromyContinuation)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
