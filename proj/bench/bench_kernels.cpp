// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "chainbalance/ensemble.hpp"
#include "chainbalance/rng.hpp"
#include "chainbalance/simulate.hpp"

namespace cb = chainbalance;

namespace {

cb::MultiLabelDataset synthetic(std::size_t n, std::size_t d, std::size_t q) {
  cb::RngStream rng(99, {});
  cb::MultiLabelDataset ds;
  ds.features = cb::Matrix<double>(n, d);
  ds.labels = cb::Matrix<cb::Bit>(n, q);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) ds.features(i, f) = rng.uniform01();
    for (std::size_t j = 0; j < q; ++j) {
      // Rarer labels further right; tied loosely to feature j.
      const double rate = 0.5 / static_cast<double>(j + 1);
      ds.labels(i, j) = ds.features(i, j % d) < rate ? 1 : 0;
    }
  }
  for (std::size_t j = 0; j < q; ++j) ds.label_names.push_back("l" + std::to_string(j));
  for (std::size_t f = 0; f < d; ++f) ds.feature_info.push_back({"f" + std::to_string(f), false, {}});
  return ds;
}

cb::Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? cb::Execution::kSerial : cb::Execution::kParallel;
}

void BM_TrainEnsemble(benchmark::State& state) {
  const auto ds = synthetic(600, 20, 6);
  cb::EnsembleSpec spec;
  spec.method = cb::Method::kECCRU3;
  spec.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cb::train_ensemble(ds, spec, mode(state)));
  }
}
BENCHMARK(BM_TrainEnsemble)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_PredictBatch(benchmark::State& state) {
  const auto ds = synthetic(2000, 20, 6);
  cb::EnsembleSpec spec;
  spec.method = cb::Method::kECC;
  spec.seed = 3;
  const auto model = cb::train_ensemble(ds, spec, cb::Execution::kParallel);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cb::predict_relevance_batch(model, ds.features, mode(state)));
  }
}
BENCHMARK(BM_PredictBatch)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_ExploitationMonteCarlo(benchmark::State& state) {
  const cb::ExploitationQuery query{100, 900, 10, 10000};
  const cb::RngStream rng(5, {cb::stream_tag::kSimulation});
  for (auto _ : state) {
    benchmark::DoNotOptimize(cb::exploitation_probability_mc(query, rng, mode(state)));
  }
}
BENCHMARK(BM_ExploitationMonteCarlo)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
