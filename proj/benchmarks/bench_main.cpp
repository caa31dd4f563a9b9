#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "oversmooth/dataset.hpp"
#include "oversmooth/gcn.hpp"
#include "oversmooth/graph.hpp"
#include "oversmooth/metrics.hpp"

using namespace oversmooth;

namespace {

Dataset sbm(std::size_t n) {
  SbmConfig cfg;
  cfg.block_sizes = {n / 2, n - n / 2};
  cfg.p_intra = 8.0 / static_cast<double>(n);
  cfg.p_inter = 1.0 / static_cast<double>(n);
  cfg.feature_dim = 16;
  cfg.seed = 1;
  return generate_sbm(cfg);
}

void BM_CosineDistanceMatrix(benchmark::State& state) {
  const auto ds = sbm(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cosine_distance_matrix(ds.features));
}
BENCHMARK(BM_CosineDistanceMatrix)->RangeMultiplier(2)->Range(128, 1024);

void BM_HopOrders(benchmark::State& state) {
  const auto ds = sbm(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hop_orders(ds.graph, 8));
}
BENCHMARK(BM_HopOrders)->RangeMultiplier(2)->Range(128, 1024);

void BM_MadGap(benchmark::State& state) {
  const auto ds = sbm(static_cast<std::size_t>(state.range(0)));
  const auto masks = madgap_masks(ds.graph, MetricConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(madgap_terms(ds.features, masks));
}
BENCHMARK(BM_MadGap)->RangeMultiplier(2)->Range(128, 1024);

void BM_GcnForward(benchmark::State& state) {
  const auto ds = sbm(512);
  const Matrix a = normalize_propagation(ds.graph);
  const auto model = GcnModel::initialize({16, 16, 2, static_cast<int>(state.range(0))}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(gcn_forward(model, a, ds.features));
}
BENCHMARK(BM_GcnForward)->DenseRange(1, 6);

void BM_Objective(benchmark::State& state) {
  const auto ds = sbm(512);
  const Matrix a = normalize_propagation(ds.graph);
  std::vector<NodeId> nodes(ds.labels.size());
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  const auto model = GcnModel::initialize({16, 16, 2, 2}, 3);
  const bool reg = state.range(0) != 0;
  const auto term = make_madreg_term(ds.graph, nodes, MetricConfig{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        evaluate_objective(model, a, ds.features, ds.labels, nodes, reg ? 0.01 : 0.0, 5e-4, reg ? &term : nullptr));
  }
}
BENCHMARK(BM_Objective)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
