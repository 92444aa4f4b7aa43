#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "terrafuse/date.hpp"
#include "terrafuse/raster.hpp"

namespace terrafuse {

enum class Sensor { Optical, Sar };

std::string_view to_string(Sensor s);
/// Throws Error{Parse}.
Sensor parse_sensor(std::string_view s);

struct CollectionItem {
  Date date;
  Sensor sensor = Sensor::Optical;
  BandStack stack;
  /// Fraction of cloud-masked pixels; always 0 for SAR.
  double cloud_fraction = 0.0;
};

/// Date-ordered image series on one shared grid.
class ImageCollection {
 public:
  ImageCollection() = default;
  /// Sorts by date (stable); throws DimensionMismatch on mixed geometry.
  explicit ImageCollection(std::vector<CollectionItem> items);

  const std::vector<CollectionItem>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

 private:
  std::vector<CollectionItem> items_;
};

/// Writes `collection.json` plus one stack container per item under `dir`.
void write_collection(const ImageCollection& c, const std::filesystem::path& dir);
ImageCollection read_collection(const std::filesystem::path& dir);

}  // namespace terrafuse
