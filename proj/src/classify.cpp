#include "terrafuse/classify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "terrafuse/error.hpp"
#include "terrafuse/kernels.hpp"

namespace terrafuse {

namespace {

std::vector<std::uint8_t> ppm_header(int width, int height) {
  std::string header = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  return {header.begin(), header.end()};
}

}  // namespace

ClassMap classify_stack(const DecisionTree& tree, const BandStack& stack, const Legend& legend) {
  if (stack.band_names() != tree.band_names())
    throw Error(ErrorKind::BandOrderMismatch, "stack bands differ from the bands the tree was trained on");
  for (const auto& node : tree.nodes())
    if (const auto* leaf = std::get_if<DecisionTree::Leaf>(&node); leaf && !legend.count(leaf->class_id))
      throw Error(ErrorKind::LegendMismatch,
                  "tree predicts class " + std::to_string(leaf->class_id) + " absent from legend");

  std::vector<kernels::Plane> planes;
  planes.reserve(stack.band_count());
  for (const auto& b : stack.bands()) planes.push_back({b.values, b.nodata});
  std::vector<std::uint8_t> labels(stack.pixel_count());
  kernels::classify_parallel(tree, planes, kNodataLabel, labels);
  return ClassMap(stack.width(), stack.height(), stack.transform(), std::move(labels), legend);
}

Palette default_palette() {
  Palette p;
  p.colors = {{0, {0, 0, 255}}, {1, {255, 255, 255}}, {2, {255, 0, 0}}};
  p.nodata = {0, 0, 0};
  return p;
}

std::vector<std::uint8_t> render_classmap(const ClassMap& map, const Palette& palette) {
  std::array<const Rgb*, 256> lut{};
  for (const auto& [id, name] : map.legend()) {
    auto it = palette.colors.find(id);
    if (it == palette.colors.end())
      throw Error(ErrorKind::MissingPaletteEntry, "no color for class '" + name + "'");
    lut[id] = &it->second;
  }
  lut[kNodataLabel] = &palette.nodata;

  auto out = ppm_header(map.width(), map.height());
  out.reserve(out.size() + map.labels().size() * 3);
  for (auto label : map.labels()) {
    const Rgb& c = *lut[label];
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

double band_percentile(const Band& band, double p) {
  std::vector<float> valid;
  valid.reserve(band.values.size());
  for (float v : band.values)
    if (!band.is_nodata(v)) valid.push_back(v);
  if (valid.empty()) return std::nan("");
  p = std::clamp(p, 0.0, 100.0);
  auto rank = static_cast<std::size_t>(std::llround(p / 100.0 * static_cast<double>(valid.size() - 1)));
  std::nth_element(valid.begin(), valid.begin() + static_cast<std::ptrdiff_t>(rank), valid.end());
  return valid[rank];
}

std::vector<std::uint8_t> render_composite(const BandStack& stack,
                                           const std::array<std::string, 3>& rgb_bands,
                                           const Stretch& stretch) {
  std::array<const Band*, 3> bands{};
  std::array<double, 3> lo{}, hi{};
  for (std::size_t c = 0; c < 3; ++c) {
    bands[c] = &stack.band(rgb_bands[c]);
    lo[c] = band_percentile(*bands[c], stretch.low_percentile);
    hi[c] = band_percentile(*bands[c], stretch.high_percentile);
  }
  auto out = ppm_header(stack.width(), stack.height());
  const std::size_t header = out.size();
  out.resize(header + stack.pixel_count() * 3);
  for (std::size_t p = 0; p < stack.pixel_count(); ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      float v = bands[c]->values[p];
      std::uint8_t level = 0;
      if (!bands[c]->is_nodata(v)) {
        if (!(hi[c] > lo[c])) {
          level = 127;
        } else {
          double scaled = (static_cast<double>(v) - lo[c]) / (hi[c] - lo[c]) * 255.0;
          level = static_cast<std::uint8_t>(std::lround(std::clamp(scaled, 0.0, 255.0)));
        }
      }
      out[header + 3 * p + c] = level;
    }
  }
  return out;
}

}  // namespace terrafuse
