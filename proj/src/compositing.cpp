#include "terrafuse/compositing.hpp"

#include <cassert>
#include <cmath>

#include "terrafuse/error.hpp"
#include "terrafuse/kernels.hpp"
#include "terrafuse/scene_sim.hpp"

namespace terrafuse {

void FilterSpec::validate() const {
  if (!(date_start < date_end)) throw Error(ErrorKind::Config, "filter date_start must precede date_end");
  if (!(max_cloud_fraction >= 0.0 && max_cloud_fraction <= 1.0))
    throw Error(ErrorKind::Config, "max_cloud_fraction must lie in [0,1]");
}

ImageCollection filter_collection(const ImageCollection& c, const FilterSpec& f) {
  f.validate();
  std::vector<CollectionItem> kept;
  for (const auto& item : c.items()) {
    if (item.sensor != f.sensor) continue;
    if (item.date < f.date_start || !(item.date < f.date_end)) continue;
    if (item.sensor == Sensor::Optical && item.cloud_fraction > f.max_cloud_fraction) continue;
    kept.push_back(item);
  }
  if (kept.empty())
    throw Error(ErrorKind::EmptyResult, "no " + std::string(to_string(f.sensor)) +
                                            " image passes the filter");
  return ImageCollection(std::move(kept));
}

BandStack reduce_mean(const ImageCollection& c, std::span<const std::string> band_names) {
  if (c.empty()) throw Error(ErrorKind::EmptyCollection, "cannot reduce an empty collection");
  const BandStack& first = c.items().front().stack;
  std::vector<Band> out;
  out.reserve(band_names.size());
  std::vector<kernels::Plane> planes(c.size());
  for (const auto& name : band_names) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Band& b = c.items()[i].stack.band(name);
      planes[i] = {b.values, b.nodata};
    }
    Band reduced{name, std::vector<float>(first.pixel_count())};
    kernels::mean_reduce_parallel(planes, reduced.values);
    out.push_back(std::move(reduced));
  }
  return BandStack(first.width(), first.height(), first.transform(), std::move(out));
}

std::vector<std::string> optical_band_names() {
  return {kOpticalBands.begin(), kOpticalBands.end()};
}

std::vector<std::string> sar_band_names() { return {"VV", "VH", "angle", "ratio"}; }

std::vector<std::string> fused_band_names() {
  auto names = optical_band_names();
  auto sar = sar_band_names();
  names.insert(names.end(), sar.begin(), sar.end());
  return names;
}

BandStack build_optical_composite(const ImageCollection& c) {
  BandStack out = reduce_mean(c, optical_band_names());
  assert(out.band_count() == 6);
  return out;
}

BandStack build_sar_composite(const ImageCollection& c) {
  const std::vector<std::string> reduced_names{"VV", "VH", "angle"};
  BandStack reduced = reduce_mean(c, reduced_names);
  const auto& vv = reduced.bands()[0].values;
  const auto& vh = reduced.bands()[1].values;
  Band ratio{"ratio", std::vector<float>(vv.size())};
  for (std::size_t p = 0; p < vv.size(); ++p) ratio.values[p] = vh[p] - vv[p];
  std::vector<Band> bands = reduced.bands();
  bands.push_back(std::move(ratio));
  return BandStack(reduced.width(), reduced.height(), reduced.transform(), std::move(bands));
}

BandStack build_fused_composite(const BandStack& optical, const BandStack& sar) {
  return stack_concat(optical, sar);
}

}  // namespace terrafuse
