#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "terrafuse/cart.hpp"
#include "terrafuse/config.hpp"
#include "terrafuse/raster.hpp"
#include "terrafuse/samples.hpp"
#include "terrafuse/validation.hpp"

namespace terrafuse {

inline constexpr std::string_view kVersion = "1.0.0";

/// The two classification routes being compared.
enum class Source { Optical, Fused };
std::string_view to_string(Source s);
/// Throws Error{Parse}.
Source parse_source(std::string_view s);

/// Extract pins from `stack` and grow a tree.
DecisionTree train_from_samples(const SampleSet& samples, const BandStack& stack,
                                const TrainParams& params);

/// Confusion matrix and metrics of `tree` on the pins that land on `stack`.
AccuracyReport validate_with_samples(const DecisionTree& tree, const SampleSet& samples,
                                     const BandStack& stack, const Legend& legend);

/// Where every artifact lives inside an output directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path truth() const { return root / "truth"; }
  std::filesystem::path collection(Sensor s) const { return root / "collections" / std::string(to_string(s)); }
  std::filesystem::path training_samples() const { return root / "samples" / "training.geojson"; }
  std::filesystem::path validation_samples() const { return root / "samples" / "validation.geojson"; }
  std::filesystem::path optical_composite() const { return root / "composites" / "optical"; }
  std::filesystem::path sar_composite() const { return root / "composites" / "sar"; }
  std::filesystem::path composite(Source s) const {
    return root / "composites" / std::string(to_string(s));
  }
  std::filesystem::path tree(Source s) const { return root / "trees" / (std::string(to_string(s)) + ".json"); }
  std::filesystem::path classmap(Source s) const { return root / "classmaps" / std::string(to_string(s)); }
  std::filesystem::path report(Source s) const { return root / "reports" / (std::string(to_string(s)) + ".json"); }
  std::filesystem::path comparison() const { return root / "reports" / "compare.json"; }
  std::filesystem::path renders() const { return root / "renders"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }

  /// Same layout rooted elsewhere (used for staging).
  Layout rebased(const std::filesystem::path& other) const { return {other}; }
};

/// Stage runner over one output directory. Each stage writes into a private
/// staging directory that is merged into the output only on success, then
/// records SHA-256 digests of its artifacts in `manifest.json`.
class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, std::string config_digest, std::filesystem::path out);

  void simulate();
  void composite();
  void train();
  void classify();
  void validate();
  void compare();
  void render();

  /// Runs a stage by CLI name. Throws Error{Config} for an unknown name.
  void run(std::string_view stage);

  const PipelineConfig& config() const noexcept { return cfg_; }
  const Layout& layout() const noexcept { return layout_; }

  SampleSet training_samples() const;
  SampleSet validation_samples() const;

 private:
  void staged(const std::string& stage, const std::function<void(const Layout&)>& body);
  void record(const std::string& stage, const std::filesystem::path& staging);

  PipelineConfig cfg_;
  std::string config_digest_;
  Layout layout_;
};

/// Stage names in execution order.
const std::vector<std::string>& stage_names();

}  // namespace terrafuse
