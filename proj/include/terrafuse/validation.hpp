#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "terrafuse/cart.hpp"
#include "terrafuse/raster.hpp"
#include "terrafuse/samples.hpp"

namespace terrafuse {

/// Rows are the reference class, columns the predicted class, both in
/// ascending legend-id order.
struct ConfusionMatrix {
  Legend legend;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const;
  std::size_t trace() const;
  std::vector<std::size_t> row_sums() const;
  std::vector<std::size_t> col_sums() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Builds an all-zero K x K matrix for `legend`.
ConfusionMatrix empty_matrix(const Legend& legend);

struct ClassAccuracy {
  std::uint8_t id = 0;
  std::string name;
  std::size_t reference_count = 0;
  std::size_t predicted_count = 0;
  /// Recall; absent when the class has no reference samples.
  std::optional<double> producers;
  /// Precision; absent when nothing was predicted as the class.
  std::optional<double> users;

  friend bool operator==(const ClassAccuracy&, const ClassAccuracy&) = default;
};

struct AccuracyReport {
  ConfusionMatrix matrix;
  double overall = 0.0;
  /// Cohen's kappa, reported alongside the remote-sensing metrics.
  double kappa = 0.0;
  std::vector<ClassAccuracy> classes;

  friend bool operator==(const AccuracyReport&, const AccuracyReport&) = default;
};

/// Throws EmptyValidationSet, DimensionMismatch, or LegendMismatch when a
/// reference or predicted class is missing from `legend`.
ConfusionMatrix confusion_matrix(const DecisionTree& tree, const LabeledVectors& v,
                                 const Legend& legend);

/// Throws EmptyMatrix when the matrix holds no samples.
AccuracyReport accuracy_metrics(const ConfusionMatrix& m);

struct ClassDelta {
  std::uint8_t id = 0;
  std::optional<double> producers;
  std::optional<double> users;
};

struct Comparison {
  AccuracyReport optical;
  AccuracyReport fused;
  double overall_delta = 0.0;
  double kappa_delta = 0.0;
  std::vector<ClassDelta> classes;
};

/// fused minus optical, overall and per class. Throws LegendMismatch.
Comparison compare_report(const AccuracyReport& optical, const AccuracyReport& fused);

std::string report_to_json(const AccuracyReport& r);
/// Throws Error{Parse}.
AccuracyReport report_from_json(std::string_view text);
std::string report_to_text(const AccuracyReport& r);

std::string comparison_to_json(const Comparison& c);
std::string comparison_to_text(const Comparison& c);

}  // namespace terrafuse
