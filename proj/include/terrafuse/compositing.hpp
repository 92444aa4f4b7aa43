#pragma once

#include <span>
#include <string>
#include <vector>

#include "terrafuse/collection.hpp"
#include "terrafuse/raster.hpp"

namespace terrafuse {

/// Date window is [date_start, date_end). The cloud threshold only applies
/// to optical items.
struct FilterSpec {
  Date date_start;
  Date date_end;
  double max_cloud_fraction = 0.2;
  Sensor sensor = Sensor::Optical;

  /// Throws Error{Config}.
  void validate() const;
};

/// Keeps matching items in order. Throws EmptyResult when nothing survives.
ImageCollection filter_collection(const ImageCollection& c, const FilterSpec& f);

/// Per-pixel temporal mean of each named band, nodata ignored, summed in date
/// order. Throws EmptyCollection or MissingBand.
BandStack reduce_mean(const ImageCollection& c, std::span<const std::string> band_names);

/// B2..B7 mean composite.
BandStack build_optical_composite(const ImageCollection& c);

/// [VV, VH, angle, ratio] where ratio = VH - VV in dB, taken after reduction.
BandStack build_sar_composite(const ImageCollection& c);

/// Optical bands followed by SAR bands (10 bands for the standard inputs).
BandStack build_fused_composite(const BandStack& optical, const BandStack& sar);

std::vector<std::string> optical_band_names();
std::vector<std::string> sar_band_names();
std::vector<std::string> fused_band_names();

}  // namespace terrafuse
