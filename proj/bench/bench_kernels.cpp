// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <map>

#include "nnlogit/classify.hpp"
#include "nnlogit/gradient_field.hpp"
#include "nnlogit/neighbors.hpp"
#include "nnlogit/synthetic.hpp"

using namespace nnlogit;

namespace {

const Dataset& example1(std::size_t n) {
  static std::map<std::size_t, Dataset> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, generate({1, n, 8, 42}).data).first;
  return it->second;
}

constexpr double kLambda = 0.01;

void BM_FieldParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset& data = example1(n);
  const NeighborIndex index(data.covariates);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_field(data, index, default_query_count(n),
                                            default_neighbor_count(n), kLambda, 1));
  }
}

void BM_FieldSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset& data = example1(n);
  const NeighborIndex index(data.covariates);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_field_serial(data, index, default_query_count(n),
                                                   default_neighbor_count(n), kLambda, 1));
  }
}

void BM_KdTreeQueries(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset& data = example1(n);
  const NeighborIndex index(data.covariates);
  const std::size_t k = default_neighbor_count(n);
  for (auto _ : state) {
    for (Eigen::Index i = 0; i < 200; ++i) {
      benchmark::DoNotOptimize(index.k_nearest({data.covariates.row(i).data(), 8}, k));
    }
  }
}

void BM_BruteForceQueries(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset& data = example1(n);
  const std::size_t k = default_neighbor_count(n);
  for (auto _ : state) {
    for (Eigen::Index i = 0; i < 200; ++i) {
      benchmark::DoNotOptimize(brute_force_k_nearest(data.covariates, {data.covariates.row(i).data(), 8}, k));
    }
  }
}

void BM_KnnPredictParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset& data = example1(n);
  KnnClassifier knn(10, 0);
  knn.train(data.covariates, data.labels);
  for (auto _ : state) benchmark::DoNotOptimize(knn.predict_batch(data.covariates));
}

void BM_KnnPredictSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset& data = example1(n);
  KnnClassifier knn(10, 0);
  knn.train(data.covariates, data.labels);
  for (auto _ : state) benchmark::DoNotOptimize(knn.predict_batch_serial(data.covariates));
}

}  // namespace

BENCHMARK(BM_FieldParallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FieldSerial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KdTreeQueries)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BruteForceQueries)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_KnnPredictParallel)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnPredictSerial)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
