#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "terrafuse/collection.hpp"
#include "terrafuse/raster.hpp"

namespace terrafuse {

inline constexpr std::array<const char*, 6> kOpticalBands{"B2", "B3", "B4", "B5", "B6", "B7"};
inline constexpr std::array<const char*, 2> kSarPolarizations{"VV", "VH"};

inline constexpr std::uint8_t kWater = 0;
inline constexpr std::uint8_t kUrban = 1;
inline constexpr std::uint8_t kNonUrban = 2;

/// Radiometry and target share of one land-cover class.
struct ClassSpec {
  std::uint8_t id = 0;
  std::string name;
  std::array<double, 6> optical_mean{};  // reflectance, B2..B7
  std::array<double, 6> optical_sd{};
  std::array<double, 2> sar_mean_db{};   // VV, VH
  double fraction = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct SceneConfig {
  std::uint64_t seed = 42;
  int width = 512;
  int height = 512;
  GeoTransform transform;
  std::vector<ClassSpec> classes;
  int n_dates = 12;
  Interval cloud_fraction_range{0.0, 0.5};
  /// Equivalent number of looks of the multiplicative speckle.
  double looks = 4.0;
  Interval angle_range{30.0, 45.0};
  Date date_start;
  Date date_end;
  /// Reflectance written into cloud-masked optical pixels (every band).
  double cloud_reflectance = 0.4;

  /// Throws Error{Config} on any violated invariant.
  void validate() const;
  Legend legend() const;
};

/// Default desk-scale scene: 512x512 grid of ~1e-4 degree pixels centered on
/// (-94.925, 29.389), water/urban/non-urban at 0.3/0.3/0.4, 12 dates between
/// 2020-01-01 and 2021-08-01.
SceneConfig default_scene_config();

/// Acquisition dates spread evenly over [date_start, date_end).
std::vector<Date> acquisition_dates(const SceneConfig& cfg);

/// Spatially coherent blobs: box-blurred white noise thresholded at the
/// quantiles matching each class fraction. Deterministic in cfg.seed.
ClassMap generate_truth(const SceneConfig& cfg);

/// B2..B7 per date: class mean plus Gaussian noise, with a smooth cloud mask
/// of random coverage overwritten by cloud reflectance.
ImageCollection generate_optical_series(const ClassMap& truth, const SceneConfig& cfg);

/// VV, VH in dB with Gamma(L, 1/L) multiplicative speckle applied in linear
/// power, plus a per-column incidence angle ramp.
ImageCollection generate_sar_series(const ClassMap& truth, const SceneConfig& cfg);

/// Separable box mean with clamped window, radius in pixels. Exposed for tests.
std::vector<double> box_blur(const std::vector<double>& field, int width, int height, int radius);

}  // namespace terrafuse
