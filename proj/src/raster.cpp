#include "terrafuse/raster.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <set>

#include <json.hpp>

#include "terrafuse/error.hpp"
#include "terrafuse/io_util.hpp"

namespace terrafuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kStackMagic = "terrafuse-stack";
constexpr const char* kClassMapMagic = "terrafuse-classmap";
constexpr int kFormatVersion = 1;

bool valid_band_name(std::string_view name) {
  if (name.empty() || name.size() > 64) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
  });
}

void check_grid(int width, int height, const GeoTransform& t) {
  if (width <= 0 || height <= 0)
    throw Error(ErrorKind::DimensionMismatch, "raster dimensions must be positive");
  if (!t.valid())
    throw Error(ErrorKind::Config, "geotransform needs finite values, pixel_w > 0, pixel_h < 0");
}

json transform_to_json(const GeoTransform& t) {
  return json{{"origin_x", t.origin_x},
              {"origin_y", t.origin_y},
              {"pixel_w", t.pixel_w},
              {"pixel_h", t.pixel_h}};
}

GeoTransform transform_from_json(const json& j) {
  GeoTransform t;
  t.origin_x = j.at("origin_x").get<double>();
  t.origin_y = j.at("origin_y").get<double>();
  t.pixel_w = j.at("pixel_w").get<double>();
  t.pixel_h = j.at("pixel_h").get<double>();
  return t;
}

std::vector<std::uint8_t> encode_f32_le(std::span<const float> values) {
  std::vector<std::uint8_t> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(values[i]);
    bytes[4 * i + 0] = static_cast<std::uint8_t>(bits);
    bytes[4 * i + 1] = static_cast<std::uint8_t>(bits >> 8);
    bytes[4 * i + 2] = static_cast<std::uint8_t>(bits >> 16);
    bytes[4 * i + 3] = static_cast<std::uint8_t>(bits >> 24);
  }
  return bytes;
}

std::vector<float> decode_f32_le(std::span<const std::uint8_t> bytes) {
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = static_cast<std::uint32_t>(bytes[4 * i]) |
                         static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8 |
                         static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16 |
                         static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24;
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

json read_header(const fs::path& path, const char* magic) {
  if (!fs::exists(path)) throw Error(ErrorKind::Format, "missing header " + path.string());
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, "malformed header " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != magic)
    throw Error(ErrorKind::Format, "bad magic in " + path.string());
  if (j.value("version", 0) != kFormatVersion)
    throw Error(ErrorKind::Format, "unsupported container version in " + path.string());
  return j;
}

}  // namespace

PixelIndex geo_to_pixel(const GeoTransform& t, double lon, double lat) {
  return {static_cast<std::int64_t>(std::floor((lon - t.origin_x) / t.pixel_w)),
          static_cast<std::int64_t>(std::floor((lat - t.origin_y) / t.pixel_h))};
}

GeoPoint pixel_to_geo(const GeoTransform& t, std::int64_t col, std::int64_t row) {
  return {t.origin_x + (static_cast<double>(col) + 0.5) * t.pixel_w,
          t.origin_y + (static_cast<double>(row) + 0.5) * t.pixel_h};
}

GeoTransform anchored_transform(double lon, double lat, int width, int height,
                                double pitch) {
  GeoTransform t;
  t.pixel_w = pitch;
  t.pixel_h = -pitch;
  t.origin_x = lon - (static_cast<double>(width / 2) + 0.5) * pitch;
  t.origin_y = lat + (static_cast<double>(height / 2) + 0.5) * pitch;
  return t;
}

BandStack::BandStack(int width, int height, GeoTransform transform, std::vector<Band> bands)
    : width_(width), height_(height), transform_(transform), bands_(std::move(bands)) {
  check_grid(width_, height_, transform_);
  if (bands_.empty()) throw Error(ErrorKind::DimensionMismatch, "band stack needs at least one band");
  std::set<std::string_view> seen;
  for (const auto& b : bands_) {
    if (!valid_band_name(b.name))
      throw Error(ErrorKind::Format, "invalid band name '" + b.name + "'");
    if (!seen.insert(b.name).second)
      throw Error(ErrorKind::DuplicateBandName, "duplicate band name '" + b.name + "'");
    if (b.values.size() != pixel_count())
      throw Error(ErrorKind::DimensionMismatch, "band '" + b.name + "' has " +
                                                    std::to_string(b.values.size()) +
                                                    " values, grid needs " +
                                                    std::to_string(pixel_count()));
  }
}

std::vector<std::string> BandStack::band_names() const {
  std::vector<std::string> names;
  names.reserve(bands_.size());
  for (const auto& b : bands_) names.push_back(b.name);
  return names;
}

std::optional<std::size_t> BandStack::find(std::string_view name) const {
  for (std::size_t i = 0; i < bands_.size(); ++i)
    if (bands_[i].name == name) return i;
  return std::nullopt;
}

const Band& BandStack::band(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw Error(ErrorKind::MissingBand, "no band named '" + std::string(name) + "'");
  return bands_[*idx];
}

BandStack BandStack::select(std::span<const std::string> names) const {
  std::vector<Band> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(band(n));
  return BandStack(width_, height_, transform_, std::move(out));
}

BandStack stack_concat(const BandStack& a, const BandStack& b) {
  if (!a.same_geometry(b))
    throw Error(ErrorKind::DimensionMismatch, "stacks differ in size or georeferencing");
  for (const auto& band : b.bands())
    if (a.find(band.name))
      throw Error(ErrorKind::DuplicateBandName, "band '" + band.name + "' present in both stacks");
  std::vector<Band> bands = a.bands();
  bands.insert(bands.end(), b.bands().begin(), b.bands().end());
  return BandStack(a.width(), a.height(), a.transform(), std::move(bands));
}

bool bitwise_equal(const BandStack& a, const BandStack& b) {
  if (!a.same_geometry(b) || a.band_count() != b.band_count()) return false;
  for (std::size_t i = 0; i < a.band_count(); ++i) {
    const Band& x = a.bands()[i];
    const Band& y = b.bands()[i];
    if (x.name != y.name) return false;
    if (std::bit_cast<std::uint32_t>(x.nodata) != std::bit_cast<std::uint32_t>(y.nodata))
      return false;
    if (std::memcmp(x.values.data(), y.values.data(), x.values.size() * sizeof(float)) != 0)
      return false;
  }
  return true;
}

ClassMap::ClassMap(int width, int height, GeoTransform transform,
                   std::vector<std::uint8_t> labels, Legend legend)
    : width_(width),
      height_(height),
      transform_(transform),
      labels_(std::move(labels)),
      legend_(std::move(legend)) {
  check_grid(width_, height_, transform_);
  if (labels_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
    throw Error(ErrorKind::DimensionMismatch, "label grid size does not match dimensions");
  if (legend_.count(kNodataLabel))
    throw Error(ErrorKind::Config, "label 255 is reserved for nodata");
  std::array<bool, 256> known{};
  for (const auto& [id, name] : legend_) known[id] = true;
  known[kNodataLabel] = true;
  for (auto l : labels_)
    if (!known[l])
      throw Error(ErrorKind::Format, "label " + std::to_string(l) + " missing from legend");
}

void write_stack(const BandStack& stack, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

  json header{{"format", kStackMagic},
              {"version", kFormatVersion},
              {"width", stack.width()},
              {"height", stack.height()},
              {"transform", transform_to_json(stack.transform())},
              {"bands", json::array()}};
  for (const auto& b : stack.bands()) {
    json nodata = std::isnan(b.nodata) ? json("nan") : json(b.nodata);
    header["bands"].push_back({{"name", b.name}, {"dtype", "f32"}, {"nodata", nodata}});
    write_bytes(dir / (b.name + ".f32"), encode_f32_le(b.values));
  }
  write_text(dir / "stack.json", header.dump(2) + "\n");
}

BandStack read_stack(const fs::path& dir) {
  json header = read_header(dir / "stack.json", kStackMagic);
  try {
    int width = header.at("width").get<int>();
    int height = header.at("height").get<int>();
    GeoTransform t = transform_from_json(header.at("transform"));
    check_grid(width, height, t);
    std::size_t expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 4;

    std::vector<Band> bands;
    for (const auto& desc : header.at("bands")) {
      Band b;
      b.name = desc.at("name").get<std::string>();
      if (!valid_band_name(b.name)) throw Error(ErrorKind::Format, "invalid band name in header");
      if (desc.at("dtype").get<std::string>() != "f32")
        throw Error(ErrorKind::Format, "unsupported dtype for band " + b.name);
      const json& nd = desc.at("nodata");
      if (nd.is_string()) {
        if (nd.get<std::string>() != "nan") throw Error(ErrorKind::Format, "bad nodata token");
        b.nodata = kNan;
      } else {
        b.nodata = nd.get<float>();
      }
      fs::path plane = dir / (b.name + ".f32");
      if (!fs::exists(plane)) throw Error(ErrorKind::Format, "missing plane " + plane.string());
      auto bytes = read_bytes(plane);
      if (bytes.size() != expected)
        throw Error(ErrorKind::Format, "plane " + plane.string() + " has " +
                                           std::to_string(bytes.size()) + " bytes, expected " +
                                           std::to_string(expected));
      b.values = decode_f32_le(bytes);
      bands.push_back(std::move(b));
    }
    return BandStack(width, height, t, std::move(bands));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, "bad stack header in " + dir.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(ErrorKind::Format, e.what());
  }
}

void write_classmap(const ClassMap& map, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  json legend = json::array();
  for (const auto& [id, name] : map.legend()) legend.push_back({{"id", id}, {"name", name}});
  json header{{"format", kClassMapMagic},
              {"version", kFormatVersion},
              {"width", map.width()},
              {"height", map.height()},
              {"transform", transform_to_json(map.transform())},
              {"nodata", kNodataLabel},
              {"legend", legend}};
  write_bytes(dir / "labels.u8", map.labels());
  write_text(dir / "classmap.json", header.dump(2) + "\n");
}

ClassMap read_classmap(const fs::path& dir) {
  json header = read_header(dir / "classmap.json", kClassMapMagic);
  try {
    int width = header.at("width").get<int>();
    int height = header.at("height").get<int>();
    GeoTransform t = transform_from_json(header.at("transform"));
    Legend legend;
    for (const auto& e : header.at("legend"))
      legend[e.at("id").get<std::uint8_t>()] = e.at("name").get<std::string>();
    fs::path plane = dir / "labels.u8";
    if (!fs::exists(plane)) throw Error(ErrorKind::Format, "missing plane " + plane.string());
    auto labels = read_bytes(plane);
    if (width <= 0 || height <= 0 ||
        labels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw Error(ErrorKind::Format, "label plane size does not match header");
    return ClassMap(width, height, t, std::move(labels), std::move(legend));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, "bad classmap header in " + dir.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(ErrorKind::Format, e.what());
  }
}

}  // namespace terrafuse
