#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "terrafuse/cart.hpp"
#include "terrafuse/classify.hpp"
#include "terrafuse/compositing.hpp"
#include "terrafuse/scene_sim.hpp"

namespace terrafuse {

struct SampleSettings {
  std::map<std::uint8_t, std::size_t> train_counts{{kWater, 78}, {kUrban, 53}, {kNonUrban, 70}};
  std::map<std::uint8_t, std::size_t> validation_counts{{kWater, 129}, {kUrban, 95}, {kNonUrban, 89}};
  double min_spacing = 3.0;
  /// Hand-placed pin files; when set they replace the simulated draw.
  std::optional<std::filesystem::path> train_path;
  std::optional<std::filesystem::path> validation_path;
};

/// Everything one run needs. Sections: scene, filter, bands, samples,
/// train_params, palette. Every section and key is optional.
struct PipelineConfig {
  SceneConfig scene = default_scene_config();
  /// Optical filter; the SAR filter shares its date window.
  FilterSpec filter;
  std::array<std::string, 3> true_color{"B4", "B3", "B2"};
  SampleSettings samples;
  TrainParams train_params;
  Palette palette = default_palette();

  FilterSpec optical_filter() const;
  FilterSpec sar_filter() const;
  std::uint64_t train_seed() const { return scene.seed * 2 + 1; }
  std::uint64_t validation_seed() const { return scene.seed * 2 + 2; }
};

PipelineConfig default_pipeline_config();

/// Relative sample paths resolve against `base_dir`. Throws Error{Config}.
PipelineConfig parse_config(std::string_view text,
                            const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace terrafuse
