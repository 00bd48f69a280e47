#include "fbc/basis.hpp"
#include "fbc/classifiers.hpp"
#include "fbc/copula.hpp"
#include "fbc/density.hpp"
#include "fbc/simgen.hpp"

#include <benchmark/benchmark.h>

using namespace fbc;

namespace {

const GeneratedData& rsdn() {
    static const GeneratedData data = [] {
        auto c = ScenarioConfig::from_label("RSDN");
        c.seed = 1;
        return generate(c);
    }();
    return data;
}

}  // namespace

static void BM_Generate(benchmark::State& state) {
    auto c = ScenarioConfig::from_label("RSDN");
    for (auto _ : state) {
        c.seed++;
        benchmark::DoNotOptimize(generate(c));
    }
}
BENCHMARK(BM_Generate)->Unit(benchmark::kMillisecond);

static void BM_Fpca(benchmark::State& state) {
    const auto& d = rsdn().train;
    for (auto _ : state) benchmark::DoNotOptimize(fpca(d, 30));
}
BENCHMARK(BM_Fpca)->Unit(benchmark::kMicrosecond);

static void BM_PluginBandwidth(benchmark::State& state) {
    const Matrix s = project(rsdn().train, fpca(rsdn().train, 1));
    const std::vector<double> x(s.data(), s.data() + s.rows());
    for (auto _ : state) benchmark::DoNotOptimize(plugin_bandwidth(x));
}
BENCHMARK(BM_PluginBandwidth)->Unit(benchmark::kMicrosecond);

static void BM_KendallTau(benchmark::State& state) {
    const Matrix s = project(rsdn().train, fpca(rsdn().train, static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(kendall_tau_matrix(s));
}
BENCHMARK(BM_KendallTau)->Arg(10)->Arg(30)->Unit(benchmark::kMicrosecond);

static void BM_TailFit(benchmark::State& state) {
    const Matrix s = project(rsdn().train, fpca(rsdn().train, 10));
    const Matrix corr = nearest_pd_repair(rank_to_correlation(kendall_tau_matrix(s), RankMethod::KendallTau));
    const Matrix u = pseudo_observations(s);
    for (auto _ : state) benchmark::DoNotOptimize(fit_t_tail(u, corr));
}
BENCHMARK(BM_TailFit)->Unit(benchmark::kMillisecond);

static void BM_ModelPath(benchmark::State& state) {
    const auto m = static_cast<Method>(state.range(0));
    state.SetLabel(std::string(method_label(m)));
    for (auto _ : state) benchmark::DoNotOptimize(ModelPath(m, RankMethod::KendallTau, rsdn().train, 30));
}
BENCHMARK(BM_ModelPath)->DenseRange(0, 7)->Unit(benchmark::kMillisecond);

static void BM_ClassifyTest(benchmark::State& state) {
    ClassifierSpec s;
    s.method = static_cast<Method>(state.range(0));
    s.J = std::size_t{10};
    const TrainedModel model = train(s, rsdn().train);
    state.SetLabel(std::string(method_label(s.method)));
    for (auto _ : state) benchmark::DoNotOptimize(classify(model, rsdn().test.curves(), rsdn().test.grid()));
}
BENCHMARK(BM_ClassifyTest)->DenseRange(0, 7)->Unit(benchmark::kMicrosecond);

static void BM_SelectJcv(benchmark::State& state) {
    const auto spec = ClassifierSpec::with_default_range(static_cast<Method>(state.range(0)));
    state.SetLabel(std::string(method_label(spec.method)));
    for (auto _ : state) benchmark::DoNotOptimize(select_J_cv(spec, rsdn().train, CounterRng(3)));
}
BENCHMARK(BM_SelectJcv)->Arg(0)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
