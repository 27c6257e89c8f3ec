#include <slopepath/datagen.hpp>
#include <slopepath/experiment.hpp>
#include <slopepath/kernels.hpp>

#include <benchmark/benchmark.h>

#include <map>

using namespace slopepath;

namespace {

const GeneratedData& data_for(int p)
{
    static std::map<int, GeneratedData> cache;
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, generate(ScenarioSpec{1, p, 10 * p, 7, 0})).first;
    return it->second;
}

void BM_XtTimesSerial(benchmark::State& state)
{
    const auto& d = data_for(static_cast<int>(state.range(0)));
    const Vector v = d.instance.y;
    Vector out;
    for (auto _ : state) {
        kernels::xt_times_serial(d.instance.X, v, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_XtTimesParallel(benchmark::State& state)
{
    const auto& d = data_for(static_cast<int>(state.range(0)));
    const Vector v = d.instance.y;
    Vector out;
    const int threads = static_cast<int>(state.range(1));
    for (auto _ : state) {
        kernels::xt_times_parallel(d.instance.X, v, out, threads);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_GradientSerial(benchmark::State& state)
{
    const auto& d = data_for(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::quadratic_gradient_serial(d.instance, d.trueBeta));
}

void BM_GradientParallel(benchmark::State& state)
{
    const auto& d = data_for(static_cast<int>(state.range(0)));
    const int threads = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::quadratic_gradient_parallel(d.instance, d.trueBeta, threads));
    }
}

// Replicate-level parallelism of the simulation harness.
void BM_Harness(benchmark::State& state)
{
    ExperimentConfig cfg;
    cfg.sizes = {{20, 200}};
    cfg.designs = {WeightDesign{DesignKind::QS, 0.1, 0}};
    cfg.replicates = 8;
    cfg.threads = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg));
}

} // namespace

BENCHMARK(BM_XtTimesSerial)->Arg(40)->Arg(160)->Arg(640);
BENCHMARK(BM_XtTimesParallel)->ArgsProduct({{40, 160, 640}, {1, 2, 4}});
BENCHMARK(BM_GradientSerial)->Arg(160)->Arg(640);
BENCHMARK(BM_GradientParallel)->ArgsProduct({{160, 640}, {1, 2, 4}});
BENCHMARK(BM_Harness)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
