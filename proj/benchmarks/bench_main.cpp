#include "homsim/angular.hpp"
#include "homsim/experiment.hpp"
#include "homsim/fock.hpp"
#include "homsim/half_int.hpp"
#include "homsim/rates.hpp"
#include "homsim/sampler.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace homsim;

namespace {

ExperimentConfig bench_config(double s2) {
    ExperimentConfig ec;
    for (EnsembleParams* site : {&ec.site_a, &ec.site_b}) {
        site->chi = std::asinh(std::sqrt(s2)) / site->cos_eta;
        site->epsilon = 1.0;
        site->retrieval_efficiency = 1.0;
        site->idler_epsilon = 1.0;
    }
    ec.delta_t = 0.0;
    return ec;
}

void bench_squeezer_kernel(benchmark::State& state) {
    const int cutoff = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(squeezer_kernel(cutoff, 0.2));
}
BENCHMARK(bench_squeezer_kernel)->Arg(4)->Arg(8)->Arg(12);

void bench_beamsplitter(benchmark::State& state) {
    const int cutoff = static_cast<int>(state.range(0));
    ModeRegistry reg(cutoff);
    reg.add_mode("a");
    reg.add_mode("b");
    reg.add_mode("c");
    reg.add_mode("d");
    FockState fock(reg);
    fock.apply_two_mode_squeezer(0, 1, 0.2);
    fock.apply_two_mode_squeezer(2, 3, 0.2);
    for (auto _ : state) {
        FockState copy = fock;
        copy.apply_beamsplitter(0, 2, 0.5);
        benchmark::DoNotOptimize(copy.norm2());
    }
}
BENCHMARK(bench_beamsplitter)->Arg(4)->Arg(6)->Arg(8);

void bench_click_patterns(benchmark::State& state) {
    const ExperimentSetup setup =
        build_folded(bench_config(0.05), Scenario::perpendicular,
                     static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(setup.state.click_pattern_probabilities(
            setup.detectors, setup.shared_mode_detectors));
}
BENCHMARK(bench_click_patterns)->Arg(4)->Arg(6)->Arg(8);

void bench_clebsch_gordan(benchmark::State& state) {
    const HalfInt three = HalfInt::of(3), two = HalfInt::of(2);
    const HalfInt one = HalfInt::of(1), zero = HalfInt::of(0);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            clebsch_gordan(three, one, one, zero, three, one));
}
BENCHMARK(bench_clebsch_gordan);

void bench_mixing_angle(benchmark::State& state) {
    const LevelScheme scheme =
        LevelScheme::uniform(HalfInt::of(3), HalfInt::of(2), HalfInt::of(3));
    for (auto _ : state)
        benchmark::DoNotOptimize(mixing_angle_exact(scheme));
}
BENCHMARK(bench_mixing_angle);

void bench_run_trials(benchmark::State& state) {
    TrialPlan plan;
    plan.config = bench_config(0.05);
    plan.cutoff = 5;
    plan.n_trials = static_cast<std::uint64_t>(state.range(0));
    plan.seed = 3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_trials(plan));
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(plan.n_trials));
}
BENCHMARK(bench_run_trials)->Arg(10000)->Arg(100000);

void bench_two_fold_quadrature(benchmark::State& state) {
    const ExperimentConfig ec = bench_config(0.02);
    for (auto _ : state)
        benchmark::DoNotOptimize(integrated_two_fold_parallel(ec));
}
BENCHMARK(bench_two_fold_quadrature);

}  // namespace

BENCHMARK_MAIN();
