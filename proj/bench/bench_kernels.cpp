// Serial vs OpenMP kernels on a default-size scene.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "terrafuse/cart.hpp"
#include "terrafuse/kernels.hpp"

namespace {

using namespace terrafuse;

constexpr std::size_t kPixels = 512 * 512;

const std::vector<std::vector<float>>& planes_data() {
  static std::vector<std::vector<float>> data = [] {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<float> u(-25.0f, 0.0f);
    std::vector<std::vector<float>> d(12, std::vector<float>(kPixels));
    for (auto& p : d)
      for (auto& v : p) v = u(rng);
    return d;
  }();
  return data;
}

std::vector<kernels::Plane> planes(std::size_t count) {
  std::vector<kernels::Plane> out;
  const auto& data = planes_data();
  for (std::size_t i = 0; i < count; ++i) out.push_back({data[i], kNan});
  return out;
}

const DecisionTree& tree() {
  static DecisionTree t = [] {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<float> u(-25.0f, 0.0f);
    LabeledVectors v{{}, {}, 0};
    for (int b = 0; b < 10; ++b) v.band_names.push_back("b" + std::to_string(b));
    for (int i = 0; i < 500; ++i) {
      LabeledRow r{std::vector<float>(10), 0};
      for (auto& x : r.x) x = u(rng);
      r.y = static_cast<std::uint8_t>((r.x[0] > -12.0f) + (r.x[3] + r.x[7] > -20.0f));
      v.rows.push_back(std::move(r));
    }
    return train(v);
  }();
  return t;
}

void BM_MeanReduceSerial(benchmark::State& state) {
  auto p = planes(12);
  std::vector<float> out(kPixels);
  for (auto _ : state) {
    kernels::mean_reduce_serial(p, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kPixels));
}

void BM_MeanReduceParallel(benchmark::State& state) {
  auto p = planes(12);
  std::vector<float> out(kPixels);
  for (auto _ : state) {
    kernels::mean_reduce_parallel(p, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kPixels));
}

void BM_ClassifySerial(benchmark::State& state) {
  auto p = planes(10);
  std::vector<std::uint8_t> out(kPixels);
  for (auto _ : state) {
    kernels::classify_serial(tree(), p, 255, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kPixels));
}

void BM_ClassifyParallel(benchmark::State& state) {
  auto p = planes(10);
  std::vector<std::uint8_t> out(kPixels);
  for (auto _ : state) {
    kernels::classify_parallel(tree(), p, 255, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kPixels));
}

}  // namespace

BENCHMARK(BM_MeanReduceSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeanReduceParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ClassifySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClassifyParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
