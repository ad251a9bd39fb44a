// OpenMP kernels against their serial references. POCF_THREADS does not apply here; use OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include "pocf/bandit.hpp"
#include "pocf/data.hpp"
#include "pocf/models.hpp"
#include "pocf/oracle.hpp"

using namespace pocf;

namespace {

GameSpec bench_game(int n, int k = 3)
{
    return make_generated_game(GeneratorKind::size_uniform, n, k, 11, {{"action_set_size", 4}});
}

EvalMode unbounded()
{
    EvalMode m;
    m.budget = ~std::uint64_t{0};
    return m;
}

void BM_EnumerateNS(benchmark::State& st)
{
    const GameSpec g = bench_game(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(enumerate_pure_ns(g));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.joint_count()));
}

void BM_EnumerateNS_Serial(benchmark::State& st)
{
    const GameSpec g = bench_game(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(serial::enumerate_pure_ns(g));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.joint_count()));
}

void BM_SampleDataset(benchmark::State& st)
{
    const GameSpec g = bench_game(8);
    const Policy rho = Policy::uniform_random(g);
    for (auto _ : st) benchmark::DoNotOptimize(sample_dataset(g, rho, st.range(0), Feedback::semi, 3));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_SampleDataset_Serial(benchmark::State& st)
{
    const GameSpec g = bench_game(8);
    const Policy rho = Policy::uniform_random(g);
    for (auto _ : st) benchmark::DoNotOptimize(serial::sample_dataset(g, rho, st.range(0), Feedback::semi, 3));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

// Block design matrices (parallel over agents) against the dense n^2 k accumulation.
void BM_RidgeFit(benchmark::State& st)
{
    const GameSpec g = bench_game(static_cast<int>(st.range(0)), 4);
    const Dataset ds = sample_dataset(g, Policy::uniform_random(g), 2000, Feedback::bandit, 4);
    for (auto _ : st) benchmark::DoNotOptimize(RidgeEstimator::fit(ds, 0.05));
}

void BM_DenseGram_Serial(benchmark::State& st)
{
    const GameSpec g = bench_game(static_cast<int>(st.range(0)), 4);
    const Dataset ds = sample_dataset(g, Policy::uniform_random(g), 2000, Feedback::bandit, 4);
    for (auto _ : st) benchmark::DoNotOptimize(serial::gram(ds));
}

void BM_DeviationRow(benchmark::State& st)
{
    const GameSpec g = bench_game(static_cast<int>(st.range(0)));
    const MixedProfile phi = MixedProfile::uniform(g);
    const AgentPayoff f = [&g](const Mask* a, int i) {
        const auto sizes = coalition_sizes(g.k(), a, g.n());
        return mean_utility_raw(g, a, sizes.data(), i);
    };
    for (auto _ : st) benchmark::DoNotOptimize(deviation_row(g, phi, 0, f, unbounded()));
}

void BM_DeviationRow_Serial(benchmark::State& st)
{
    const GameSpec g = bench_game(static_cast<int>(st.range(0)));
    const MixedProfile phi = MixedProfile::uniform(g);
    const AgentPayoff f = [&g](const Mask* a, int i) {
        const auto sizes = coalition_sizes(g.k(), a, g.n());
        return mean_utility_raw(g, a, sizes.data(), i);
    };
    for (auto _ : st) benchmark::DoNotOptimize(serial::deviation_row(g, phi, 0, f));
}

} // namespace

BENCHMARK(BM_EnumerateNS)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateNS_Serial)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleDataset)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleDataset_Serial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RidgeFit)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DenseGram_Serial)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DeviationRow)->Arg(7)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DeviationRow_Serial)->Arg(7)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
