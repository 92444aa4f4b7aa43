#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace terrafuse {

class DecisionTree;

namespace kernels {

/// One input plane of a per-pixel reduction, with its nodata sentinel.
struct Plane {
  std::span<const float> values;
  float nodata;
};

/// Per-pixel arithmetic mean over `planes`, summed in plane order in double
/// precision and skipping nodata. Pixels with no valid sample become NaN.
/// The serial and OpenMP variants are bitwise identical.
void mean_reduce_serial(std::span<const Plane> planes, std::span<float> out);
void mean_reduce_parallel(std::span<const Plane> planes, std::span<float> out);

/// Per-pixel tree descent over band planes (one per feature, in tree order).
/// Pixels with nodata in any band get `nodata_label`.
void classify_serial(const DecisionTree& tree, std::span<const Plane> bands,
                     std::uint8_t nodata_label, std::span<std::uint8_t> out);
void classify_parallel(const DecisionTree& tree, std::span<const Plane> bands,
                       std::uint8_t nodata_label, std::span<std::uint8_t> out);

}  // namespace kernels
}  // namespace terrafuse
