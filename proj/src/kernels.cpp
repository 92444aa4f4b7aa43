#include "terrafuse/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

#include "terrafuse/cart.hpp"
#include "terrafuse/error.hpp"

namespace terrafuse::kernels {

namespace {

inline bool is_nodata(float v, float nodata) {
  return std::isnan(v) || (!std::isnan(nodata) && v == nodata);
}

inline float mean_at(std::span<const Plane> planes, std::size_t p) {
  double sum = 0.0;
  int count = 0;
  for (const auto& plane : planes) {
    float v = plane.values[p];
    if (is_nodata(v, plane.nodata)) continue;
    sum += static_cast<double>(v);
    ++count;
  }
  return count > 0 ? static_cast<float>(sum / count) : std::numeric_limits<float>::quiet_NaN();
}

inline std::uint8_t classify_at(const DecisionTree& tree, std::span<const Plane> bands,
                                std::uint8_t nodata_label, std::size_t p,
                                std::span<float> scratch) {
  for (std::size_t b = 0; b < bands.size(); ++b) {
    float v = bands[b].values[p];
    if (is_nodata(v, bands[b].nodata)) return nodata_label;
    scratch[b] = v;
  }
  return tree.predict(scratch);
}

void check_planes(std::span<const Plane> planes, std::size_t n) {
  for (const auto& plane : planes)
    if (plane.values.size() != n)
      throw Error(ErrorKind::DimensionMismatch, "plane size differs from output size");
}

}  // namespace

void mean_reduce_serial(std::span<const Plane> planes, std::span<float> out) {
  check_planes(planes, out.size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = mean_at(planes, p);
}

void mean_reduce_parallel(std::span<const Plane> planes, std::span<float> out) {
  check_planes(planes, out.size());
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p)
    out[static_cast<std::size_t>(p)] = mean_at(planes, static_cast<std::size_t>(p));
}

void classify_serial(const DecisionTree& tree, std::span<const Plane> bands,
                     std::uint8_t nodata_label, std::span<std::uint8_t> out) {
  check_planes(bands, out.size());
  std::vector<float> scratch(bands.size());
  for (std::size_t p = 0; p < out.size(); ++p)
    out[p] = classify_at(tree, bands, nodata_label, p, scratch);
}

void classify_parallel(const DecisionTree& tree, std::span<const Plane> bands,
                       std::uint8_t nodata_label, std::span<std::uint8_t> out) {
  check_planes(bands, out.size());
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel
  {
    std::vector<float> scratch(bands.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t p = 0; p < n; ++p)
      out[static_cast<std::size_t>(p)] =
          classify_at(tree, bands, nodata_label, static_cast<std::size_t>(p), scratch);
  }
}

}  // namespace terrafuse::kernels
