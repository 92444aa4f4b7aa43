#include "terrafuse/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "terrafuse/error.hpp"

namespace terrafuse {

namespace {

enum StreamTag : std::uint32_t { kTruthStream = 1, kOpticalStream = 2, kSarStream = 3 };

std::mt19937_64 make_stream(std::uint64_t seed, StreamTag tag, std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), index};
  return std::mt19937_64(seq);
}

int blur_radius(int width) { return std::max(1, width / 16); }

std::vector<double> smooth_field(std::mt19937_64& rng, int width, int height) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> noise(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (auto& v : noise) v = gauss(rng);
  return box_blur(noise, width, height, blur_radius(width));
}

/// Indices of `candidates` ordered by (field value, index).
void order_by_field(std::vector<std::size_t>& candidates, const std::vector<double>& field) {
  std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return field[a] < field[b] || (field[a] == field[b] && a < b);
  });
}

}  // namespace

void SceneConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, msg); };
  if (width <= 0 || height <= 0) fail("scene width and height must be positive");
  if (!transform.valid()) fail("scene transform invalid");
  if (classes.empty()) fail("scene needs at least one class");
  if (n_dates < 1) fail("n_dates must be >= 1");
  if (!(looks >= 1.0) || !std::isfinite(looks)) fail("looks must be >= 1");
  if (!(cloud_fraction_range.lo >= 0.0 && cloud_fraction_range.lo <= cloud_fraction_range.hi &&
        cloud_fraction_range.hi <= 1.0))
    fail("cloud_fraction_range must be a sub-interval of [0,1]");
  if (!(std::isfinite(angle_range.lo) && std::isfinite(angle_range.hi)))
    fail("angle_range must be finite");
  if (!(date_start < date_end)) fail("date_start must precede date_end");
  if (date_start.days_until(date_end) < n_dates) fail("date range shorter than n_dates days");
  if (!std::isfinite(cloud_reflectance)) fail("cloud_reflectance must be finite");

  std::set<std::uint8_t> ids;
  std::set<std::string> names;
  double total = 0.0;
  for (const auto& c : classes) {
    if (c.id == kNodataLabel) fail("class id 255 is reserved for nodata");
    if (!ids.insert(c.id).second) fail("duplicate class id " + std::to_string(c.id));
    if (!names.insert(c.name).second) fail("duplicate class name " + c.name);
    for (double sd : c.optical_sd)
      if (!(sd >= 0.0) || !std::isfinite(sd)) fail("optical_sd must be finite and >= 0");
    for (double m : c.optical_mean)
      if (!std::isfinite(m)) fail("optical_mean must be finite");
    for (double m : c.sar_mean_db)
      if (!std::isfinite(m)) fail("sar_mean_db must be finite");
    if (!(c.fraction >= 0.0)) fail("class fraction must be >= 0");
    total += c.fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("class fractions must sum to 1");
  for (const auto& c : classes)
    if (std::llround(c.fraction * static_cast<double>(width) * height) < 1)
      fail("class '" + c.name + "' would cover no pixel");
}

Legend SceneConfig::legend() const {
  Legend legend;
  for (const auto& c : classes) legend[c.id] = c.name;
  return legend;
}

SceneConfig default_scene_config() {
  SceneConfig cfg;
  cfg.transform = anchored_transform(-94.925, 29.389, cfg.width, cfg.height, 1e-4);
  cfg.date_start = Date::parse("2020-01-01");
  cfg.date_end = Date::parse("2021-08-01");
  // Dark water and dark urban surfaces overlap optically; SAR separates them.
  cfg.classes = {
      {kWater, "water", {0.062, 0.058, 0.046, 0.040, 0.036, 0.032},
       {0.020, 0.020, 0.020, 0.020, 0.020, 0.020}, {-22.0, -28.0}, 0.3},
      {kUrban, "urban", {0.070, 0.066, 0.056, 0.052, 0.048, 0.046},
       {0.030, 0.030, 0.030, 0.030, 0.030, 0.030}, {-5.0, -10.0}, 0.3},
      {kNonUrban, "non-urban", {0.045, 0.070, 0.050, 0.150, 0.260, 0.300},
       {0.030, 0.030, 0.030, 0.040, 0.050, 0.050}, {-12.0, -18.0}, 0.4},
  };
  return cfg;
}

std::vector<Date> acquisition_dates(const SceneConfig& cfg) {
  long span = cfg.date_start.days_until(cfg.date_end);
  std::vector<Date> dates;
  dates.reserve(static_cast<std::size_t>(cfg.n_dates));
  for (int i = 0; i < cfg.n_dates; ++i)
    dates.push_back(cfg.date_start.plus_days(span * i / cfg.n_dates));
  return dates;
}

std::vector<double> box_blur(const std::vector<double>& field, int width, int height, int radius) {
  const auto w = static_cast<std::size_t>(width);
  std::vector<double> tmp(field.size()), out(field.size());
  std::vector<double> prefix(static_cast<std::size_t>(std::max(width, height)) + 1);

  for (int r = 0; r < height; ++r) {
    const double* row = field.data() + static_cast<std::size_t>(r) * w;
    prefix[0] = 0.0;
    for (int c = 0; c < width; ++c) prefix[c + 1] = prefix[c] + row[c];
    for (int c = 0; c < width; ++c) {
      int lo = std::max(0, c - radius), hi = std::min(width - 1, c + radius);
      tmp[static_cast<std::size_t>(r) * w + c] = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
    }
  }
  for (int c = 0; c < width; ++c) {
    prefix[0] = 0.0;
    for (int r = 0; r < height; ++r)
      prefix[r + 1] = prefix[r] + tmp[static_cast<std::size_t>(r) * w + c];
    for (int r = 0; r < height; ++r) {
      int lo = std::max(0, r - radius), hi = std::min(height - 1, r + radius);
      out[static_cast<std::size_t>(r) * w + c] = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
    }
  }
  return out;
}

ClassMap generate_truth(const SceneConfig& cfg) {
  cfg.validate();
  const std::size_t n = static_cast<std::size_t>(cfg.width) * static_cast<std::size_t>(cfg.height);
  std::vector<std::uint8_t> labels(n, cfg.classes.back().id);

  // Class k claims the lowest values of its own field among pixels still
  // unassigned; the last class takes the remainder.
  std::vector<std::size_t> remaining(n);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  double cumulative = 0.0;
  long long assigned = 0;
  for (std::size_t k = 0; k + 1 < cfg.classes.size(); ++k) {
    cumulative += cfg.classes[k].fraction;
    long long target = std::llround(cumulative * static_cast<double>(n)) - assigned;
    target = std::clamp<long long>(target, 0, static_cast<long long>(remaining.size()));
    auto rng = make_stream(cfg.seed, kTruthStream, static_cast<std::uint32_t>(k));
    auto field = smooth_field(rng, cfg.width, cfg.height);
    order_by_field(remaining, field);
    for (long long i = 0; i < target; ++i) labels[remaining[static_cast<std::size_t>(i)]] = cfg.classes[k].id;
    remaining.erase(remaining.begin(), remaining.begin() + target);
    std::sort(remaining.begin(), remaining.end());
    assigned += target;
  }
  return ClassMap(cfg.width, cfg.height, cfg.transform, std::move(labels), cfg.legend());
}

namespace {

void check_truth(const ClassMap& truth, const SceneConfig& cfg) {
  cfg.validate();
  if (truth.width() != cfg.width || truth.height() != cfg.height ||
      !(truth.transform() == cfg.transform))
    throw Error(ErrorKind::Config, "truth geometry does not match scene config");
  for (const auto& [id, name] : truth.legend()) {
    bool found = std::any_of(cfg.classes.begin(), cfg.classes.end(),
                             [&](const ClassSpec& c) { return c.id == id; });
    if (!found) throw Error(ErrorKind::Config, "truth class '" + name + "' has no ClassSpec");
  }
}

std::array<const ClassSpec*, 256> spec_lookup(const SceneConfig& cfg) {
  std::array<const ClassSpec*, 256> lookup{};
  for (const auto& c : cfg.classes) lookup[c.id] = &c;
  return lookup;
}

CollectionItem optical_date(const ClassMap& truth, const SceneConfig& cfg, const Date& date,
                            std::uint32_t index) {
  const std::size_t n = truth.labels().size();
  auto rng = make_stream(cfg.seed, kOpticalStream, index);

  std::uniform_real_distribution<double> coverage_dist(cfg.cloud_fraction_range.lo,
                                                       cfg.cloud_fraction_range.hi);
  double coverage = cfg.cloud_fraction_range.hi > cfg.cloud_fraction_range.lo
                        ? coverage_dist(rng)
                        : cfg.cloud_fraction_range.lo;
  auto clouded_count = static_cast<std::size_t>(std::llround(coverage * static_cast<double>(n)));
  std::vector<bool> cloud(n, false);
  if (clouded_count > 0) {
    auto field = smooth_field(rng, cfg.width, cfg.height);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    order_by_field(order, field);
    for (std::size_t i = 0; i < clouded_count; ++i) cloud[order[i]] = true;
  }

  const auto lookup = spec_lookup(cfg);
  std::vector<Band> bands(kOpticalBands.size());
  for (std::size_t b = 0; b < bands.size(); ++b) {
    bands[b].name = kOpticalBands[b];
    bands[b].values.resize(n);
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto cloud_value = static_cast<float>(cfg.cloud_reflectance);
  for (std::size_t p = 0; p < n; ++p) {
    const ClassSpec& spec = *lookup[truth.labels()[p]];
    for (std::size_t b = 0; b < bands.size(); ++b) {
      double z = gauss(rng);
      bands[b].values[p] =
          cloud[p] ? cloud_value : static_cast<float>(spec.optical_mean[b] + spec.optical_sd[b] * z);
    }
  }
  return CollectionItem{date, Sensor::Optical,
                        BandStack(truth.width(), truth.height(), truth.transform(), std::move(bands)),
                        static_cast<double>(clouded_count) / static_cast<double>(n)};
}

CollectionItem sar_date(const ClassMap& truth, const SceneConfig& cfg, const Date& date,
                        std::uint32_t index) {
  const std::size_t n = truth.labels().size();
  const auto w = static_cast<std::size_t>(truth.width());
  auto rng = make_stream(cfg.seed, kSarStream, index);
  std::gamma_distribution<double> speckle(cfg.looks, 1.0 / cfg.looks);
  const auto lookup = spec_lookup(cfg);

  Band vv{"VV", std::vector<float>(n)}, vh{"VH", std::vector<float>(n)};
  Band angle{"angle", std::vector<float>(n)};
  for (std::size_t p = 0; p < n; ++p) {
    const ClassSpec& spec = *lookup[truth.labels()[p]];
    double vv_lin = std::pow(10.0, spec.sar_mean_db[0] / 10.0) * speckle(rng);
    double vh_lin = std::pow(10.0, spec.sar_mean_db[1] / 10.0) * speckle(rng);
    vv.values[p] = static_cast<float>(10.0 * std::log10(vv_lin));
    vh.values[p] = static_cast<float>(10.0 * std::log10(vh_lin));
  }
  const double span = cfg.angle_range.hi - cfg.angle_range.lo;
  for (std::size_t c = 0; c < w; ++c) {
    double t = w > 1 ? static_cast<double>(c) / static_cast<double>(w - 1) : 0.0;
    auto value = static_cast<float>(cfg.angle_range.lo + span * t);
    for (std::size_t r = 0; r < static_cast<std::size_t>(truth.height()); ++r)
      angle.values[r * w + c] = value;
  }
  std::vector<Band> bands;
  bands.push_back(std::move(vv));
  bands.push_back(std::move(vh));
  bands.push_back(std::move(angle));
  return CollectionItem{date, Sensor::Sar,
                        BandStack(truth.width(), truth.height(), truth.transform(), std::move(bands)),
                        0.0};
}

template <typename Generate>
ImageCollection generate_series(const ClassMap& truth, const SceneConfig& cfg, Generate generate) {
  check_truth(truth, cfg);
  const auto dates = acquisition_dates(cfg);
  std::vector<std::optional<CollectionItem>> slots(dates.size());
  // Each date owns its RNG stream, so the schedule does not affect results.
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < dates.size(); ++i)
    slots[i].emplace(generate(truth, cfg, dates[i], static_cast<std::uint32_t>(i)));
  std::vector<CollectionItem> items;
  items.reserve(slots.size());
  for (auto& s : slots) items.push_back(std::move(*s));
  return ImageCollection(std::move(items));
}

}  // namespace

ImageCollection generate_optical_series(const ClassMap& truth, const SceneConfig& cfg) {
  return generate_series(truth, cfg, optical_date);
}

ImageCollection generate_sar_series(const ClassMap& truth, const SceneConfig& cfg) {
  return generate_series(truth, cfg, sar_date);
}

}  // namespace terrafuse
