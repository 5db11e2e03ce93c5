#include <benchmark/benchmark.h>

#include "dosefind/engine.hpp"
#include "dosefind/catalog.hpp"

using namespace dosefind;

namespace {

std::vector<PolicyConfig> designs() {
    std::vector<PolicyConfig> out;
    for (PolicyKind kind : {PolicyKind::Seeda, PolicyKind::SeedaPlateau, PolicyKind::Crm})
        out.push_back(PolicyConfig{.kind = kind});
    return out;
}

void BM_RunBatchSerial(benchmark::State& st) {
    const Scenario s = *find_scenario("main-setting");
    const auto configs = designs();
    for (auto _ : st)
        benchmark::DoNotOptimize(
            run_batch_serial(s, configs, static_cast<int>(st.range(0)), TrialOptions{300, 3}, 7));
    st.SetItemsProcessed(st.iterations() * st.range(0) * static_cast<long>(configs.size()));
}

void BM_RunBatchParallel(benchmark::State& st) {
    const Scenario s = *find_scenario("main-setting");
    const auto configs = designs();
    for (auto _ : st)
        benchmark::DoNotOptimize(
            run_batch(s, configs, static_cast<int>(st.range(0)), TrialOptions{300, 3}, 7));
    st.SetItemsProcessed(st.iterations() * st.range(0) * static_cast<long>(configs.size()));
}

}  // namespace

BENCHMARK(BM_RunBatchSerial)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RunBatchParallel)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
