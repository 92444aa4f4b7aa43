#include "terrafuse/config.hpp"

#include <set>

#include <json.hpp>

#include "terrafuse/error.hpp"
#include "terrafuse/io_util.hpp"

namespace terrafuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

void only_keys(const json& section, std::string_view name, std::initializer_list<const char*> allowed) {
  if (!section.is_object()) fail("section '" + std::string(name) + "' must be an object");
  std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : section.items())
    if (!keys.count(key)) fail("unknown key '" + key + "' in section '" + std::string(name) + "'");
}

template <typename T>
void read_into(const json& section, const char* key, T& target) {
  if (section.contains(key)) target = section.at(key).get<T>();
}

Interval read_interval(const json& j) {
  auto v = j.get<std::vector<double>>();
  if (v.size() != 2) fail("interval needs exactly two numbers");
  return {v[0], v[1]};
}

std::uint8_t class_id_for(const SceneConfig& scene, const std::string& key) {
  for (const auto& c : scene.classes)
    if (c.name == key || std::to_string(c.id) == key) return c.id;
  fail("unknown class '" + key + "'");
}

std::map<std::uint8_t, std::size_t> read_counts(const json& j, const SceneConfig& scene) {
  if (!j.is_object()) fail("sample counts must map class name to count");
  std::map<std::uint8_t, std::size_t> counts;
  for (const auto& [key, value] : j.items()) counts[class_id_for(scene, key)] = value.get<std::size_t>();
  return counts;
}

void parse_scene(const json& s, SceneConfig& scene) {
  only_keys(s, "scene", {"seed", "width", "height", "pixel_size", "anchor", "n_dates",
                         "cloud_fraction_range", "looks", "angle_range", "date_range",
                         "cloud_reflectance", "classes"});
  read_into(s, "seed", scene.seed);
  read_into(s, "width", scene.width);
  read_into(s, "height", scene.height);
  read_into(s, "n_dates", scene.n_dates);
  read_into(s, "looks", scene.looks);
  read_into(s, "cloud_reflectance", scene.cloud_reflectance);
  if (s.contains("cloud_fraction_range")) scene.cloud_fraction_range = read_interval(s["cloud_fraction_range"]);
  if (s.contains("angle_range")) scene.angle_range = read_interval(s["angle_range"]);
  if (s.contains("date_range")) {
    auto range = s["date_range"].get<std::vector<std::string>>();
    if (range.size() != 2) fail("date_range needs [start, end]");
    scene.date_start = Date::parse(range[0]);
    scene.date_end = Date::parse(range[1]);
  }
  double pixel = s.value("pixel_size", 1e-4);
  std::array<double, 2> anchor{-94.925, 29.389};
  if (s.contains("anchor")) anchor = s["anchor"].get<std::array<double, 2>>();
  if (!(pixel > 0.0)) fail("pixel_size must be positive");
  if (scene.width <= 0 || scene.height <= 0) fail("scene width and height must be positive");
  scene.transform = anchored_transform(anchor[0], anchor[1], scene.width, scene.height, pixel);

  if (s.contains("classes")) {
    scene.classes.clear();
    for (const auto& c : s["classes"]) {
      only_keys(c, "scene.classes[]", {"id", "name", "optical_mean", "optical_sd", "sar_mean_db", "fraction"});
      ClassSpec spec;
      int id = c.at("id").get<int>();
      if (id < 0 || id > 254) fail("class id must lie in [0, 254]");
      spec.id = static_cast<std::uint8_t>(id);
      spec.name = c.at("name").get<std::string>();
      spec.optical_mean = c.at("optical_mean").get<std::array<double, 6>>();
      spec.optical_sd = c.at("optical_sd").get<std::array<double, 6>>();
      spec.sar_mean_db = c.at("sar_mean_db").get<std::array<double, 2>>();
      spec.fraction = c.at("fraction").get<double>();
      scene.classes.push_back(std::move(spec));
    }
  }
}

}  // namespace

FilterSpec PipelineConfig::optical_filter() const {
  FilterSpec f = filter;
  f.sensor = Sensor::Optical;
  return f;
}

FilterSpec PipelineConfig::sar_filter() const {
  FilterSpec f = filter;
  f.sensor = Sensor::Sar;
  f.max_cloud_fraction = 1.0;
  return f;
}

PipelineConfig default_pipeline_config() {
  PipelineConfig cfg;
  cfg.filter = {cfg.scene.date_start, cfg.scene.date_end, 0.2, Sensor::Optical};
  return cfg;
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  PipelineConfig cfg = default_pipeline_config();
  try {
    json doc = json::parse(text);
    only_keys(doc, "<root>", {"scene", "filter", "bands", "samples", "train_params", "palette"});

    if (doc.contains("scene")) parse_scene(doc["scene"], cfg.scene);
    cfg.filter.date_start = cfg.scene.date_start;
    cfg.filter.date_end = cfg.scene.date_end;

    if (doc.contains("filter")) {
      const json& f = doc["filter"];
      only_keys(f, "filter", {"date_range", "max_cloud_fraction"});
      if (f.contains("date_range")) {
        auto range = f["date_range"].get<std::vector<std::string>>();
        if (range.size() != 2) fail("filter date_range needs [start, end]");
        cfg.filter.date_start = Date::parse(range[0]);
        cfg.filter.date_end = Date::parse(range[1]);
      }
      read_into(f, "max_cloud_fraction", cfg.filter.max_cloud_fraction);
    }

    if (doc.contains("bands")) {
      const json& b = doc["bands"];
      only_keys(b, "bands", {"optical", "sar", "true_color"});
      // Band order is fixed so trained trees stay portable; the lists are
      // accepted only when they restate it.
      if (b.contains("optical") && b["optical"].get<std::vector<std::string>>() != optical_band_names())
        fail("bands.optical must be [B2, B3, B4, B5, B6, B7]");
      if (b.contains("sar") && b["sar"].get<std::vector<std::string>>() != sar_band_names())
        fail("bands.sar must be [VV, VH, angle, ratio]");
      if (b.contains("true_color")) cfg.true_color = b["true_color"].get<std::array<std::string, 3>>();
    }

    if (doc.contains("samples")) {
      const json& s = doc["samples"];
      only_keys(s, "samples", {"train_counts", "validation_counts", "min_spacing", "train_path",
                               "validation_path"});
      if (s.contains("train_counts")) cfg.samples.train_counts = read_counts(s["train_counts"], cfg.scene);
      if (s.contains("validation_counts"))
        cfg.samples.validation_counts = read_counts(s["validation_counts"], cfg.scene);
      read_into(s, "min_spacing", cfg.samples.min_spacing);
      auto resolve = [&](const char* key) -> std::optional<fs::path> {
        if (!s.contains(key)) return std::nullopt;
        fs::path p = s[key].get<std::string>();
        return p.is_absolute() ? p : base_dir / p;
      };
      cfg.samples.train_path = resolve("train_path");
      cfg.samples.validation_path = resolve("validation_path");
    }

    if (doc.contains("train_params")) {
      const json& t = doc["train_params"];
      only_keys(t, "train_params", {"max_depth", "min_leaf_samples", "min_impurity_decrease"});
      read_into(t, "max_depth", cfg.train_params.max_depth);
      read_into(t, "min_leaf_samples", cfg.train_params.min_leaf_samples);
      read_into(t, "min_impurity_decrease", cfg.train_params.min_impurity_decrease);
    }

    if (doc.contains("palette")) {
      const json& p = doc["palette"];
      if (!p.is_object()) fail("palette must be an object");
      for (const auto& [key, value] : p.items()) {
        auto rgb = value.get<std::array<int, 3>>();
        for (int v : rgb)
          if (v < 0 || v > 255) fail("palette components must lie in [0, 255]");
        Rgb color{static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                  static_cast<std::uint8_t>(rgb[2])};
        if (key == "nodata")
          cfg.palette.nodata = color;
        else
          cfg.palette.colors[class_id_for(cfg.scene, key)] = color;
      }
    }
  } catch (const json::exception& e) {
    fail(std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    fail(std::string("config: ") + e.what());
  }

  cfg.scene.validate();
  cfg.filter.validate();
  cfg.train_params.validate();
  if (!(cfg.samples.min_spacing >= 0.0)) fail("min_spacing must be >= 0");
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    fail(std::string("cannot read config: ") + e.what());
  }
  return parse_config(text, path.parent_path());
}

}  // namespace terrafuse
