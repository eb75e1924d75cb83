// Serial reference versus OpenMP kernels.
#include <benchmark/benchmark.h>

#include "tmg/design.hpp"
#include "tmg/dgp.hpp"
#include "tmg/estimators.hpp"
#include "tmg/exec.hpp"
#include "tmg/experiment.hpp"

namespace {

tmg::BalancedPanel panel(int n, int T) {
    tmg::DgpConfig c;
    c.n = n;
    c.T = T;
    c.kappa2 = 15.5;
    return tmg::generate_replication(c, 0).panel;
}

void BM_BuildDesigns(benchmark::State& state) {
    const auto p = panel(static_cast<int>(state.range(0)), 3);
    const auto exec = state.range(1) ? tmg::Exec::Parallel : tmg::Exec::Serial;
    for (auto _ : state) benchmark::DoNotOptimize(tmg::build_designs(p, exec));
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.SetLabel(state.range(1) ? "parallel" : "serial");
}
BENCHMARK(BM_BuildDesigns)->ArgsProduct({{1000, 100000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Tmg(benchmark::State& state) {
    const auto p = panel(static_cast<int>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(tmg::tmg(p));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Tmg)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Experiment(benchmark::State& state) {
    tmg::DgpConfig c;
    c.n = 1000;
    c.T = 2;
    c.kappa2 = 15.5;
    const std::vector<tmg::EstimatorSpec> specs = {tmg::EstimatorSpec::parse("fe"), tmg::EstimatorSpec::parse("tmg"),
                                                   tmg::EstimatorSpec::parse("gp")};
    const int jobs = state.range(0) ? tmg::available_threads() : 1;
    for (auto _ : state) benchmark::DoNotOptimize(tmg::run_experiment(c, specs, 100, {}, jobs));
    state.SetLabel(std::to_string(jobs) + " job(s)");
}
BENCHMARK(BM_Experiment)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
