#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "ssd/data.hpp"
#include "ssd/model.hpp"
#include "ssd/optimizer.hpp"
#include "ssd/reference.hpp"
#include "ssd/steepest.hpp"
#include "ssd/svd.hpp"

namespace {

ssd::Mat random_mat(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    ssd::Rng rng(seed);
    ssd::Mat m(rows, cols);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

const ssd::Dataset& gaussian() {
    static const ssd::Dataset ds = [] {
        ssd::GaussianSpec spec;
        spec.seed = 7;
        return ssd::gen_gaussian(spec);
    }();
    return ds;
}

void BM_JacobiSvd(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ssd::Mat a = random_mat(n, n, 1);
    for (auto _ : state) benchmark::DoNotOptimize(ssd::jacobi_svd(a));
}
BENCHMARK(BM_JacobiSvd)->Arg(5)->Arg(10)->Arg(32);

void BM_SteepestMap(benchmark::State& state, const char* spec_text) {
    const ssd::NormSpec spec = ssd::NormSpec::parse(spec_text);
    const ssd::Mat g = random_mat(10, 5, 2);
    for (auto _ : state) benchmark::DoNotOptimize(ssd::steepest_map(g, spec));
}
BENCHMARK_CAPTURE(BM_SteepestMap, ew_inf, "ew:inf");
BENCHMARK_CAPTURE(BM_SteepestMap, ew_2, "ew:2");
BENCHMARK_CAPTURE(BM_SteepestMap, ew_3, "ew:3");
BENCHMARK_CAPTURE(BM_SteepestMap, sch_inf, "sch:inf");
BENCHMARK_CAPTURE(BM_SteepestMap, sch_1, "sch:1");

void BM_NewtonSchulz(benchmark::State& state) {
    const ssd::Mat g = random_mat(10, 5, 3);
    ssd::SteepestOptions opts;
    opts.newton_schulz = true;
    for (auto _ : state) benchmark::DoNotOptimize(ssd::steepest_map(g, ssd::NormSpec::schatten(ssd::kInf), opts));
}
BENCHMARK(BM_NewtonSchulz);

void BM_FullGradient(benchmark::State& state) {
    const ssd::Dataset& ds = gaussian();
    const ssd::Mat w = random_mat(ds.k(), ds.d(), 4);
    for (auto _ : state) benchmark::DoNotOptimize(ssd::grad(w, ds, ssd::LossKind::cross_entropy));
}
BENCHMARK(BM_FullGradient);

void BM_OptimizerStep(benchmark::State& state) {
    const ssd::Dataset& ds = gaussian();
    ssd::OptimizerConfig cfg;
    cfg.batch_size = static_cast<std::size_t>(state.range(0));
    cfg.norm = ssd::NormSpec::schatten(ssd::kInf);
    cfg.momentum = true;
    cfg.beta1 = 0.9;
    cfg.vr = state.range(1) != 0;
    cfg.schedule = ssd::Schedule{1.0, 0.5, 0.5};
    ssd::TrainState st = ssd::TrainState::init(cfg, ssd::Mat(ds.k(), ds.d()));
    if (cfg.vr) ssd::take_snapshot(st, cfg, ds);
    std::vector<std::size_t> batch(cfg.batch_size);
    std::iota(batch.begin(), batch.end(), std::size_t{0});
    for (auto _ : state) benchmark::DoNotOptimize(ssd::step(st, cfg, ds, batch));
}
BENCHMARK(BM_OptimizerStep)->Args({20, 0})->Args({20, 1})->Args({200, 0});

void BM_MaxMargin(benchmark::State& state, const char* spec_text) {
    const ssd::Dataset& ds = gaussian();
    const ssd::NormSpec spec = ssd::NormSpec::parse(spec_text);
    for (auto _ : state) benchmark::DoNotOptimize(ssd::solve_max_margin(ds, spec));
}
BENCHMARK_CAPTURE(BM_MaxMargin, ew_2, "ew:2")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_MaxMargin, sch_inf, "sch:inf")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
