#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "terrafuse/cart.hpp"
#include "terrafuse/raster.hpp"

namespace terrafuse {

/// Labels every pixel of `stack`; pixels with nodata in any band get 255.
/// The stack's band names must equal the tree's, in order, else
/// BandOrderMismatch. Leaf classes missing from `legend` raise LegendMismatch.
ClassMap classify_stack(const DecisionTree& tree, const BandStack& stack, const Legend& legend);

using Rgb = std::array<std::uint8_t, 3>;

struct Palette {
  std::map<std::uint8_t, Rgb> colors;
  Rgb nodata{0, 0, 0};
};

/// water blue, urban white, non-urban red, nodata black.
Palette default_palette();

/// Binary PPM (P6). Throws MissingPaletteEntry when a legend class has no color.
std::vector<std::uint8_t> render_classmap(const ClassMap& map, const Palette& palette);

struct Stretch {
  double low_percentile = 2.0;
  double high_percentile = 98.0;
};

/// Per-band linear stretch between the given percentiles of the valid
/// pixels, clipped to [0, 255]. A band whose percentiles coincide renders
/// as 127; nodata renders as 0. Throws MissingBand.
std::vector<std::uint8_t> render_composite(const BandStack& stack,
                                           const std::array<std::string, 3>& rgb_bands,
                                           const Stretch& stretch = {});

/// Nearest-rank percentile (p in [0, 100]) of the non-nodata values of a band.
/// Returns NaN for an all-nodata band.
double band_percentile(const Band& band, double p);

}  // namespace terrafuse
