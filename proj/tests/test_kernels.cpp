#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <random>

#include "terrafuse/cart.hpp"
#include "terrafuse/kernels.hpp"
#include "test_support.hpp"

using namespace terrafuse;

namespace {

std::vector<std::vector<float>> random_planes(std::size_t count, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-30.0f, 5.0f);
  std::bernoulli_distribution hole(0.05);
  std::vector<std::vector<float>> planes(count, std::vector<float>(n));
  for (auto& p : planes)
    for (auto& v : p) v = hole(rng) ? kNan : u(rng);
  return planes;
}

}  // namespace

TEST(Kernels, MeanReduceParallelMatchesSerialBitwise) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const std::size_t n = 10007;
    auto data = random_planes(12, n, seed);
    std::vector<kernels::Plane> planes;
    for (auto& d : data) planes.push_back({d, kNan});
    std::vector<float> serial(n), parallel(n);
    kernels::mean_reduce_serial(planes, serial);
    kernels::mean_reduce_parallel(planes, parallel);
    ASSERT_EQ(std::memcmp(serial.data(), parallel.data(), n * sizeof(float)), 0);
  }
}

TEST(Kernels, MeanReduceRejectsRaggedPlanes) {
  std::vector<float> a(4), b(5), out(4);
  std::vector<kernels::Plane> planes{{a, kNan}, {b, kNan}};
  EXPECT_THROW(kernels::mean_reduce_serial(planes, out), std::exception);
}

TEST(Kernels, ClassifyParallelMatchesSerial) {
  auto data = random_planes(3, 5000, 7);
  LabeledVectors train_rows{{}, {"a", "b", "c"}, 0};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> u(-30.0f, 5.0f);
  for (int i = 0; i < 300; ++i) {
    LabeledRow r{{u(rng), u(rng), u(rng)}, 0};
    r.y = static_cast<std::uint8_t>((r.x[0] > -10.0f) + (r.x[1] > 0.0f));
    train_rows.rows.push_back(r);
  }
  DecisionTree tree = train(train_rows);
  std::vector<kernels::Plane> planes;
  for (auto& d : data) planes.push_back({d, kNan});
  std::vector<std::uint8_t> serial(5000), parallel(5000);
  kernels::classify_serial(tree, planes, 255, serial);
  kernels::classify_parallel(tree, planes, 255, parallel);
  EXPECT_EQ(serial, parallel);
  for (std::size_t p = 0; p < 5000; ++p) {
    bool hole = std::isnan(data[0][p]) || std::isnan(data[1][p]) || std::isnan(data[2][p]);
    if (hole) {
      ASSERT_EQ(serial[p], 255);
    } else {
      std::vector<float> x{data[0][p], data[1][p], data[2][p]};
      ASSERT_EQ(serial[p], tree.predict(x));
    }
  }
}
