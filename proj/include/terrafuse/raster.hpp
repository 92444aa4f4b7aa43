#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace terrafuse {

/// North-up affine georeferencing in plate-carree degrees. The origin is the
/// outer corner of pixel (0, 0).
struct GeoTransform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_w = 1e-4;
  double pixel_h = -1e-4;

  bool valid() const noexcept {
    return std::isfinite(origin_x) && std::isfinite(origin_y) &&
           std::isfinite(pixel_w) && std::isfinite(pixel_h) && pixel_w > 0.0 &&
           pixel_h < 0.0;
  }

  friend bool operator==(const GeoTransform&, const GeoTransform&) = default;
};

struct PixelIndex {
  std::int64_t col = 0;
  std::int64_t row = 0;
  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
};

/// No bounds clamp; callers check the returned index against the grid.
PixelIndex geo_to_pixel(const GeoTransform& t, double lon, double lat);

/// Pixel-center coordinate.
GeoPoint pixel_to_geo(const GeoTransform& t, std::int64_t col, std::int64_t row);

/// Grid of `width` x `height` pixels of `pitch` degrees whose center pixel
/// (width/2, height/2) is centered on (lon, lat).
GeoTransform anchored_transform(double lon, double lat, int width, int height,
                                double pitch);

inline constexpr float kNan = std::numeric_limits<float>::quiet_NaN();

struct Band {
  std::string name;
  std::vector<float> values;
  float nodata = kNan;

  /// NaN is always invalid; a finite nodata sentinel is matched exactly.
  bool is_nodata(float v) const noexcept {
    return std::isnan(v) || (!std::isnan(nodata) && v == nodata);
  }
};

/// Immutable multi-band float raster. All bands share the grid; names are
/// unique and the stack holds at least one band.
class BandStack {
 public:
  BandStack(int width, int height, GeoTransform transform, std::vector<Band> bands);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  const GeoTransform& transform() const noexcept { return transform_; }
  const std::vector<Band>& bands() const noexcept { return bands_; }
  std::size_t band_count() const noexcept { return bands_.size(); }

  std::vector<std::string> band_names() const;
  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws MissingBand.
  const Band& band(std::string_view name) const;

  bool in_bounds(PixelIndex p) const noexcept {
    return p.col >= 0 && p.row >= 0 && p.col < width_ && p.row < height_;
  }

  /// New stack holding only `names`, in the given order. Throws MissingBand.
  BandStack select(std::span<const std::string> names) const;

  bool same_geometry(const BandStack& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           transform_ == other.transform_;
  }

 private:
  int width_;
  int height_;
  GeoTransform transform_;
  std::vector<Band> bands_;
};

/// Bands of `a` followed by bands of `b`, sample values copied unchanged.
/// Throws DimensionMismatch or DuplicateBandName.
BandStack stack_concat(const BandStack& a, const BandStack& b);

/// Bitwise equality of two stacks, NaN payloads included.
bool bitwise_equal(const BandStack& a, const BandStack& b);

inline constexpr std::uint8_t kNodataLabel = 255;

using Legend = std::map<std::uint8_t, std::string>;

/// Per-pixel class labels. Label 255 is reserved for nodata and may appear
/// without a legend entry.
class ClassMap {
 public:
  ClassMap(int width, int height, GeoTransform transform,
           std::vector<std::uint8_t> labels, Legend legend);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const GeoTransform& transform() const noexcept { return transform_; }
  const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }
  const Legend& legend() const noexcept { return legend_; }

  std::uint8_t at(int col, int row) const {
    return labels_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(col)];
  }

  friend bool operator==(const ClassMap&, const ClassMap&) = default;

 private:
  int width_;
  int height_;
  GeoTransform transform_;
  std::vector<std::uint8_t> labels_;
  Legend legend_;
};

/// Container format: directory with `stack.json` and one `<band>.f32` plane
/// per band (little-endian float32, row-major, no header).
void write_stack(const BandStack& stack, const std::filesystem::path& dir);
BandStack read_stack(const std::filesystem::path& dir);

/// Same layout for class maps: `classmap.json` plus `labels.u8`.
void write_classmap(const ClassMap& map, const std::filesystem::path& dir);
ClassMap read_classmap(const std::filesystem::path& dir);

}  // namespace terrafuse
