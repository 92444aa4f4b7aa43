#include <gtest/gtest.h>

#include <functional>
#include <numeric>
#include <random>

#include "terrafuse/compositing.hpp"
#include "terrafuse/error.hpp"
#include "terrafuse/scene_sim.hpp"
#include "terrafuse/validation.hpp"
#include "test_support.hpp"

using namespace terrafuse;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

ConfusionMatrix matrix(std::vector<std::vector<std::size_t>> counts) {
  Legend legend;
  for (std::size_t i = 0; i < counts.size(); ++i) legend[static_cast<std::uint8_t>(i)] = "c" + std::to_string(i);
  return ConfusionMatrix{legend, std::move(counts)};
}

AccuracyReport report_with_overall(double overall) {
  AccuracyReport r = accuracy_metrics(matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  r.overall = overall;
  r.matrix.legend = default_legend();
  return r;
}

/// Threshold classifier on a single feature: class = number of cut points below x.
DecisionTree staircase() {
  return DecisionTree({DecisionTree::Split{0, 0.5, 1, 2}, DecisionTree::Leaf{0, {1, 0, 0}},
                       DecisionTree::Split{0, 1.5, 3, 4}, DecisionTree::Leaf{1, {0, 1, 0}},
                       DecisionTree::Leaf{2, {0, 0, 1}}},
                      {"f"});
}

}  // namespace

TEST(ConfusionMatrix, PerfectAndConstantClassifiers) {
  LabeledVectors v{{}, {"f"}, 0};
  for (int i = 0; i < 30; ++i) v.rows.push_back({{static_cast<float>(i % 3)}, static_cast<std::uint8_t>(i % 3)});
  ConfusionMatrix perfect = confusion_matrix(staircase(), v, default_legend());
  EXPECT_EQ(perfect.counts, (std::vector<std::vector<std::size_t>>{{10, 0, 0}, {0, 10, 0}, {0, 0, 10}}));

  DecisionTree zero({DecisionTree::Leaf{0, {1}}}, {"f"});
  ConfusionMatrix constant = confusion_matrix(zero, v, default_legend());
  EXPECT_EQ(constant.counts, (std::vector<std::vector<std::size_t>>{{10, 0, 0}, {10, 0, 0}, {10, 0, 0}}));
  EXPECT_EQ(constant.col_sums(), (std::vector<std::size_t>{30, 0, 0}));
}

TEST(ConfusionMatrix, Errors) {
  EXPECT_EQ(kind_of([] { confusion_matrix(staircase(), LabeledVectors{{}, {"f"}, 0}, default_legend()); }),
            ErrorKind::EmptyValidationSet);
  LabeledVectors wrong{{{{1.0f}, 0}}, {"g"}, 0};
  EXPECT_EQ(kind_of([&] { confusion_matrix(staircase(), wrong, default_legend()); }),
            ErrorKind::BandOrderMismatch);
  LabeledVectors unknown{{{{1.0f}, 9}}, {"f"}, 0};
  EXPECT_EQ(kind_of([&] { confusion_matrix(staircase(), unknown, default_legend()); }),
            ErrorKind::LegendMismatch);
}

TEST(ConfusionMatrix, ValidationDrawRowSums) {
  SceneConfig cfg = terrafuse::testing::small_scene(256, 42);
  auto truth = generate_truth(cfg);
  auto optical = build_optical_composite(generate_optical_series(truth, cfg));
  auto train_pins = auto_sample(truth, {{kWater, 78}, {kUrban, 53}, {kNonUrban, 70}}, 85, 3.0);
  auto valid_pins = auto_sample(truth, {{kWater, 129}, {kUrban, 95}, {kNonUrban, 89}}, 86, 3.0, &train_pins);
  DecisionTree tree = train(extract_features(train_pins, optical));
  ConfusionMatrix m = confusion_matrix(tree, extract_features(valid_pins, optical), truth.legend());
  EXPECT_EQ(m.row_sums(), (std::vector<std::size_t>{129, 95, 89}));
  EXPECT_EQ(m.total(), 313u);
  AccuracyReport r = accuracy_metrics(m);
  EXPECT_EQ(r.overall, static_cast<double>(m.trace()) / 313.0);
}

TEST(AccuracyMetrics, Examples) {
  AccuracyReport diag = accuracy_metrics(matrix({{4, 0, 0}, {0, 7, 0}, {0, 0, 2}}));
  EXPECT_EQ(diag.overall, 1.0);
  EXPECT_EQ(diag.kappa, 1.0);
  for (const auto& c : diag.classes) {
    EXPECT_EQ(c.producers, 1.0);
    EXPECT_EQ(c.users, 1.0);
  }

  AccuracyReport chance = accuracy_metrics(matrix({{1, 1}, {1, 1}}));
  EXPECT_EQ(chance.overall, 0.5);
  EXPECT_EQ(chance.kappa, 0.0);

  AccuracyReport hand = accuracy_metrics(matrix({{50, 10}, {5, 35}}));
  EXPECT_EQ(hand.overall, 85.0 / 100.0);
  // p_e = (60*55 + 40*45) / 100^2 = 0.51
  EXPECT_NEAR(hand.kappa, (0.85 - 0.51) / (1 - 0.51), 1e-15);
  EXPECT_EQ(hand.classes[0].producers, 50.0 / 60.0);
  EXPECT_EQ(hand.classes[0].users, 50.0 / 55.0);
  EXPECT_EQ(hand.classes[1].producers, 35.0 / 40.0);
  EXPECT_EQ(hand.classes[1].users, 35.0 / 45.0);

  EXPECT_EQ(kind_of([] { accuracy_metrics(matrix({{0, 0}, {0, 0}})); }), ErrorKind::EmptyMatrix);
}

TEST(AccuracyMetrics, AbsentClassesHaveNoAccuracy) {
  AccuracyReport r = accuracy_metrics(matrix({{3, 0, 1}, {0, 0, 0}, {0, 0, 2}}));
  EXPECT_FALSE(r.classes[1].producers);
  EXPECT_FALSE(r.classes[1].users);
  EXPECT_EQ(r.classes[1].reference_count, 0u);
}

TEST(AccuracyMetrics, BoundsOnRandomMatrices) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> c(0, 30);
  for (int trial = 0; trial < 500; ++trial) {
    auto m = matrix({{c(rng), c(rng), c(rng)}, {c(rng), c(rng), c(rng)}, {c(rng), c(rng), c(rng)}});
    if (m.total() == 0) continue;
    AccuracyReport r = accuracy_metrics(m);
    ASSERT_EQ(r.overall, static_cast<double>(m.trace()) / static_cast<double>(m.total()));
    ASSERT_GE(r.overall, 0.0);
    ASSERT_LE(r.overall, 1.0);
    ASSERT_LE(r.kappa, r.overall + 1e-12);
    ASSERT_GE(r.kappa, -1.0 - 1e-12);
    for (const auto& cl : r.classes) {
      if (cl.producers) ASSERT_TRUE(*cl.producers >= 0.0 && *cl.producers <= 1.0);
      if (cl.users) ASSERT_TRUE(*cl.users >= 0.0 && *cl.users <= 1.0);
    }
  }
}

TEST(CompareReport, Deltas) {
  Comparison c = compare_report(report_with_overall(0.817), report_with_overall(0.888));
  EXPECT_NEAR(c.overall_delta, 0.071, 1e-12);
  AccuracyReport same = report_with_overall(0.8);
  EXPECT_EQ(compare_report(same, same).overall_delta, 0.0);
  EXPECT_EQ(compare_report(same, same).kappa_delta, 0.0);
  EXPECT_LT(compare_report(report_with_overall(0.9), report_with_overall(0.7)).overall_delta, 0.0);
  std::string text = comparison_to_text(c);
  EXPECT_NE(text.find("0.817"), std::string::npos);
  EXPECT_NE(text.find("0.888"), std::string::npos);
  EXPECT_NE(text.find("+0.071"), std::string::npos);
}

TEST(CompareReport, LegendMismatch) {
  AccuracyReport a = accuracy_metrics(matrix({{1, 0}, {0, 1}}));
  AccuracyReport b = accuracy_metrics(matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  EXPECT_EQ(kind_of([&] { compare_report(a, b); }), ErrorKind::LegendMismatch);
}

TEST(ReportJson, RoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> c(0, 40);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = matrix({{c(rng), c(rng), c(rng)}, {c(rng), 0, c(rng)}, {c(rng), c(rng), c(rng)}});
    if (m.total() == 0) continue;
    m.legend = default_legend();
    AccuracyReport r = accuracy_metrics(m);
    std::string text = report_to_json(r);
    AccuracyReport back = report_from_json(text);
    ASSERT_EQ(back, r);
    ASSERT_EQ(report_to_json(back), text);
  }
  EXPECT_EQ(kind_of([] { report_from_json("{"); }), ErrorKind::Parse);
}
