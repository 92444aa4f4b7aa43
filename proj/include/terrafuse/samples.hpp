#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "terrafuse/raster.hpp"

namespace terrafuse {

/// A labeled pin.
struct SamplePoint {
  double lon = 0.0;
  double lat = 0.0;
  std::uint8_t class_id = 0;
  std::optional<std::string> note;

  friend bool operator==(const SamplePoint&, const SamplePoint&) = default;
};

struct SampleSet {
  std::vector<SamplePoint> features;
  Legend legend;

  /// Throws Error{Parse} if a class id is missing from the legend or a
  /// coordinate is not finite.
  void validate() const;

  friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

/// water=0, urban=1, non-urban=2.
Legend default_legend();

/// GeoJSON FeatureCollection of Point features with integer property "class"
/// and optional string "label". The legend travels as a top-level "legend"
/// member; documents without it get the default legend.
SampleSet parse_samples(std::string_view text);
std::string serialize_samples(const SampleSet& s);

struct LabeledRow {
  std::vector<float> x;
  std::uint8_t y = 0;
};

/// Feature table; every row has one value per band, in `band_names` order.
struct LabeledVectors {
  std::vector<LabeledRow> rows;
  std::vector<std::string> band_names;
  /// Pins that fell outside the raster or on nodata.
  std::size_t dropped = 0;

  std::size_t feature_count() const noexcept { return band_names.size(); }
};

/// Nearest-pixel lookup of every pin. Throws AllSamplesDropped when a
/// non-empty set loses every pin.
LabeledVectors extract_features(const SampleSet& s, const BandStack& stack);

/// Seeded class-pure pins at pixel centers, pairwise at least `min_spacing`
/// pixels apart and at least that far from every pin in `exclude`. Classes
/// are drawn in ascending id order. Throws InsufficientPixels.
SampleSet auto_sample(const ClassMap& truth, const std::map<std::uint8_t, std::size_t>& counts,
                      std::uint64_t seed, double min_spacing, const SampleSet* exclude = nullptr);

}  // namespace terrafuse
