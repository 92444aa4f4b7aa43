#include "terrafuse/samples.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "terrafuse/error.hpp"

namespace terrafuse {

using nlohmann::json;

Legend default_legend() { return {{0, "water"}, {1, "urban"}, {2, "non-urban"}}; }

void SampleSet::validate() const {
  for (const auto& f : features) {
    if (!std::isfinite(f.lon) || !std::isfinite(f.lat))
      throw Error(ErrorKind::Parse, "sample coordinates must be finite");
    if (!legend.count(f.class_id))
      throw Error(ErrorKind::Parse, "sample class " + std::to_string(f.class_id) + " not in legend");
  }
}

SampleSet parse_samples(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed GeoJSON: ") + e.what());
  }
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Parse, msg); };
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
    fail("document is not a FeatureCollection");
  if (!doc.contains("features") || !doc["features"].is_array()) fail("missing features array");

  SampleSet set;
  try {
    if (doc.contains("legend")) {
      for (const auto& e : doc.at("legend")) {
        int id = e.at("id").get<int>();
        if (id < 0 || id >= kNodataLabel) fail("legend id out of range");
        set.legend[static_cast<std::uint8_t>(id)] = e.at("name").get<std::string>();
      }
    } else {
      set.legend = default_legend();
    }
    for (const auto& f : doc["features"]) {
      if (f.value("type", "") != "Feature") fail("feature without type Feature");
      const json& geom = f.at("geometry");
      if (!geom.is_object() || geom.value("type", "") != "Point")
        fail("only Point geometries are supported");
      const json& coords = geom.at("coordinates");
      if (!coords.is_array() || coords.size() < 2 || !coords[0].is_number() || !coords[1].is_number())
        fail("Point needs numeric [lon, lat]");
      const json& props = f.at("properties");
      if (!props.is_object() || !props.contains("class")) fail("feature missing property 'class'");
      if (!props["class"].is_number_integer()) fail("property 'class' must be an integer");
      auto cls = props["class"].get<long long>();
      if (cls < 0 || cls >= kNodataLabel) fail("class id out of range");
      SamplePoint p{coords[0].get<double>(), coords[1].get<double>(),
                    static_cast<std::uint8_t>(cls), std::nullopt};
      if (props.contains("label") && !props["label"].is_null()) {
        if (!props["label"].is_string()) fail("property 'label' must be a string");
        p.note = props["label"].get<std::string>();
      }
      set.features.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    fail(std::string("bad feature: ") + e.what());
  }
  set.validate();
  return set;
}

std::string serialize_samples(const SampleSet& s) {
  s.validate();
  json features = json::array();
  for (const auto& f : s.features) {
    json props{{"class", f.class_id}};
    if (f.note) props["label"] = *f.note;
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {f.lon, f.lat}}}},
                        {"properties", props}});
  }
  json legend = json::array();
  for (const auto& [id, name] : s.legend) legend.push_back({{"id", id}, {"name", name}});
  json doc{{"type", "FeatureCollection"}, {"legend", legend}, {"features", features}};
  return doc.dump(1) + "\n";
}

LabeledVectors extract_features(const SampleSet& s, const BandStack& stack) {
  LabeledVectors out;
  out.band_names = stack.band_names();
  const auto w = static_cast<std::size_t>(stack.width());
  for (const auto& pin : s.features) {
    PixelIndex px = geo_to_pixel(stack.transform(), pin.lon, pin.lat);
    if (!stack.in_bounds(px)) {
      ++out.dropped;
      continue;
    }
    std::size_t offset = static_cast<std::size_t>(px.row) * w + static_cast<std::size_t>(px.col);
    LabeledRow row{std::vector<float>(stack.band_count()), pin.class_id};
    bool valid = true;
    for (std::size_t b = 0; b < stack.band_count() && valid; ++b) {
      const Band& band = stack.bands()[b];
      float v = band.values[offset];
      valid = !band.is_nodata(v);
      row.x[b] = v;
    }
    if (!valid) {
      ++out.dropped;
      continue;
    }
    out.rows.push_back(std::move(row));
  }
  if (!s.features.empty() && out.rows.empty())
    throw Error(ErrorKind::AllSamplesDropped,
                "all " + std::to_string(s.features.size()) + " pins fell outside the raster or on nodata");
  return out;
}

namespace {

/// Uniform grid over pixel space; answers "is any accepted pin closer than
/// the spacing" by scanning neighbouring cells.
class SpacingIndex {
 public:
  explicit SpacingIndex(double spacing) : spacing_(spacing), cell_(std::max(1.0, spacing)) {}

  bool admits(double x, double y) const {
    if (spacing_ <= 0.0) return true;
    auto cx = cell_of(x), cy = cell_of(y);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find(key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (const auto& [px, py] : it->second)
          if (std::hypot(px - x, py - y) < spacing_) return false;
      }
    return true;
  }

  void add(double x, double y) { cells_[key(cell_of(x), cell_of(y))].emplace_back(x, y); }

 private:
  long long cell_of(double v) const { return static_cast<long long>(std::floor(v / cell_)); }
  static long long key(long long cx, long long cy) { return cx * 1'000'003LL + cy; }

  double spacing_;
  double cell_;
  std::unordered_map<long long, std::vector<std::pair<double, double>>> cells_;
};

}  // namespace

SampleSet auto_sample(const ClassMap& truth, const std::map<std::uint8_t, std::size_t>& counts,
                      std::uint64_t seed, double min_spacing, const SampleSet* exclude) {
  if (!(min_spacing >= 0.0) || !std::isfinite(min_spacing))
    throw Error(ErrorKind::Config, "min_spacing must be finite and >= 0");
  SampleSet out;
  out.legend = truth.legend();
  SpacingIndex index(min_spacing);
  if (exclude) {
    for (const auto& pin : exclude->features) {
      // Pixel-space position of the pin (continuous, pixel centers at +0.5).
      double x = (pin.lon - truth.transform().origin_x) / truth.transform().pixel_w - 0.5;
      double y = (pin.lat - truth.transform().origin_y) / truth.transform().pixel_h - 0.5;
      index.add(x, y);
    }
  }

  const auto w = static_cast<std::size_t>(truth.width());
  for (const auto& [cls, count] : counts) {
    if (count == 0) continue;
    if (!truth.legend().count(cls))
      throw Error(ErrorKind::Config, "class " + std::to_string(cls) + " not in truth legend");
    std::vector<std::size_t> candidates;
    for (std::size_t p = 0; p < truth.labels().size(); ++p)
      if (truth.labels()[p] == cls) candidates.push_back(p);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(cls)};
    std::mt19937_64 rng(seq);
    std::shuffle(candidates.begin(), candidates.end(), rng);

    std::size_t placed = 0;
    for (std::size_t p : candidates) {
      if (placed == count) break;
      auto col = static_cast<std::int64_t>(p % w);
      auto row = static_cast<std::int64_t>(p / w);
      if (!index.admits(static_cast<double>(col), static_cast<double>(row))) continue;
      index.add(static_cast<double>(col), static_cast<double>(row));
      GeoPoint g = pixel_to_geo(truth.transform(), col, row);
      out.features.push_back({g.lon, g.lat, cls, std::nullopt});
      ++placed;
    }
    if (placed < count)
      throw Error(ErrorKind::InsufficientPixels,
                  "class " + std::to_string(cls) + ": placed " + std::to_string(placed) + " of " +
                      std::to_string(count) + " pins at spacing " + std::to_string(min_spacing));
  }
  return out;
}

}  // namespace terrafuse
