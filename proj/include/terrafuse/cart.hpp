#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "terrafuse/samples.hpp"

namespace terrafuse {

/// Gini impurity 1 - sum_c (n_c / N)^2. Throws EmptyCounts when N == 0.
double gini(std::span<const std::size_t> counts);

struct SplitCandidate {
  std::size_t feature = 0;
  /// Rows with x[feature] <= threshold go left.
  double threshold = 0.0;
  /// Size-weighted mean of the two children's Gini impurity.
  double weighted_impurity = 0.0;

  friend bool operator==(const SplitCandidate&, const SplitCandidate&) = default;
};

/// Exhaustive search over midpoints between consecutive distinct values of
/// every feature. Minimizes weighted child impurity; ties go to the lower
/// feature index, then the lower threshold. Impurities are compared exactly
/// (integer arithmetic), not through rounded doubles. Returns nullopt when
/// no threshold separates the rows.
std::optional<SplitCandidate> best_split(const LabeledVectors& data);

struct TrainParams {
  int max_depth = 12;
  std::size_t min_leaf_samples = 1;
  double min_impurity_decrease = 0.0;

  /// Throws Error{Config}.
  void validate() const;
};

class DecisionTree {
 public:
  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
  };
  struct Leaf {
    std::uint8_t class_id = 0;
    /// Training rows per class id reaching this leaf.
    std::vector<std::size_t> counts;
  };
  using Node = std::variant<Split, Leaf>;

  /// Node 0 is the root; every child index is greater than its parent's.
  /// Throws Error{Parse} on a malformed node graph.
  DecisionTree(std::vector<Node> nodes, std::vector<std::string> band_names);

  /// Throws DimensionMismatch when |x| differs from the feature count.
  std::uint8_t predict(std::span<const float> x) const;
  std::vector<std::uint8_t> predict_batch(std::span<const std::vector<float>> xs) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<std::string>& band_names() const noexcept { return band_names_; }
  std::size_t feature_count() const noexcept { return band_names_.size(); }
  std::size_t depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::string> band_names_;
};

/// Greedy recursive partitioning. Stops on a pure node, max_depth,
/// fewer than 2 * min_leaf_samples rows, no separating split, or a decrease
/// below min_impurity_decrease. Leaves predict the majority class (lowest id
/// on ties). Throws EmptyTrainingSet.
DecisionTree train(const LabeledVectors& data, const TrainParams& params = {});

/// Nested JSON document: {"type":"split", feature, threshold, left, right}
/// or {"type":"leaf", class, counts}, wrapped with the band list.
std::string serialize_tree(const DecisionTree& tree);
/// Throws Error{Parse}.
DecisionTree parse_tree(std::string_view text);

}  // namespace terrafuse
