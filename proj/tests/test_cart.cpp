#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "cart_oracle.hpp"
#include "terrafuse/cart.hpp"
#include "terrafuse/compositing.hpp"
#include "terrafuse/error.hpp"
#include "terrafuse/scene_sim.hpp"
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

LabeledVectors one_feature(std::vector<float> xs, std::vector<std::uint8_t> ys) {
  LabeledVectors v{{}, {"f0"}, 0};
  for (std::size_t i = 0; i < xs.size(); ++i) v.rows.push_back({{xs[i]}, ys[i]});
  return v;
}

/// Small-alphabet features so ties between thresholds are common.
LabeledVectors random_dataset(std::mt19937_64& rng, std::size_t max_rows) {
  std::uniform_int_distribution<std::size_t> rows(2, max_rows);
  std::uniform_int_distribution<int> value(0, 5), cls(0, 2);
  LabeledVectors v{{}, {"a", "b", "c"}, 0};
  const std::size_t n = rows(rng);
  for (std::size_t i = 0; i < n; ++i)
    v.rows.push_back({{static_cast<float>(value(rng)), static_cast<float>(value(rng)) * 0.5f,
                       static_cast<float>(value(rng)) - 2.0f},
                      static_cast<std::uint8_t>(cls(rng))});
  return v;
}

std::vector<oracle::Row> to_oracle(const LabeledVectors& v) {
  std::vector<oracle::Row> out;
  for (const auto& r : v.rows) out.push_back({r.x, r.y});
  return out;
}

double training_accuracy(const DecisionTree& t, const LabeledVectors& v) {
  std::size_t hit = 0;
  for (const auto& r : v.rows) hit += t.predict(r.x) == r.y;
  return static_cast<double>(hit) / static_cast<double>(v.rows.size());
}

}  // namespace

TEST(Gini, Examples) {
  std::vector<std::size_t> pure{10, 0, 0}, even{5, 5}, three{1, 1, 1}, empty{0, 0};
  EXPECT_DOUBLE_EQ(gini(pure), 0.0);
  EXPECT_DOUBLE_EQ(gini(even), 0.5);
  EXPECT_NEAR(gini(three), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(kind_of([&] { gini(empty); }), ErrorKind::EmptyCounts);
}

TEST(Gini, BoundedByOneMinusOneOverK) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> c(0, 50);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::size_t> counts{c(rng), c(rng), c(rng), c(rng)};
    if (counts[0] + counts[1] + counts[2] + counts[3] == 0) continue;
    double g = gini(counts);
    ASSERT_GE(g, 0.0);
    ASSERT_LE(g, 1.0 - 1.0 / 4.0 + 1e-12);
  }
}

TEST(BestSplit, SeparatesTwoClusters) {
  auto s = best_split(one_feature({1, 2, 9, 10}, {0, 0, 1, 1}));
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0u);
  EXPECT_EQ(s->threshold, 5.5);
  EXPECT_EQ(s->weighted_impurity, 0.0);
}

TEST(BestSplit, IdenticalRowsHaveNoSplit) {
  EXPECT_FALSE(best_split(one_feature({3, 3, 3}, {0, 1, 2})));
  EXPECT_FALSE(best_split(one_feature({3}, {0})));
}

TEST(BestSplit, TiesGoToLowerFeatureThenLowerThreshold) {
  LabeledVectors v{{}, {"a", "b"}, 0};
  v.rows = {{{1, 1}, 0}, {{2, 2}, 1}, {{3, 3}, 0}, {{4, 4}, 1}};
  auto s = best_split(v);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0u);
  EXPECT_EQ(s->threshold, 1.5);
}

TEST(BestSplit, AgreesWithBruteForceOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 400; ++trial) {
    LabeledVectors v = random_dataset(rng, 50);
    auto got = best_split(v);
    auto want = oracle::brute_force_split(to_oracle(v));
    ASSERT_EQ(got.has_value(), want.has_value()) << "trial " << trial;
    if (!got) continue;
    ASSERT_EQ(got->feature, want->feature) << "trial " << trial;
    ASSERT_EQ(got->threshold, want->threshold) << "trial " << trial;
    ASSERT_NEAR(got->weighted_impurity, want->weighted_impurity, 1e-12) << "trial " << trial;
  }
}

TEST(Train, Examples) {
  DecisionTree t = train(one_feature({1, 2, 9, 10}, {0, 0, 1, 1}));
  EXPECT_EQ(t.depth(), 1u);
  EXPECT_EQ(t.leaf_count(), 2u);
  std::vector<float> lo{5.5f}, hi{5.6f};
  EXPECT_EQ(t.predict(lo), 0);
  EXPECT_EQ(t.predict(hi), 1);

  DecisionTree pure = train(one_feature({1, 2, 3}, {2, 2, 2}));
  EXPECT_EQ(pure.nodes().size(), 1u);
  std::vector<float> any{100.0f};
  EXPECT_EQ(pure.predict(any), 2);

  EXPECT_EQ(kind_of([] { train(LabeledVectors{{}, {"a"}, 0}); }), ErrorKind::EmptyTrainingSet);
  std::vector<float> wide{1.0f, 2.0f};
  EXPECT_EQ(kind_of([&] { t.predict(wide); }), ErrorKind::DimensionMismatch);
}

TEST(Train, MajorityLeafBreaksTiesTowardLowestId) {
  DecisionTree t = train(one_feature({1, 1, 1, 1}, {2, 1, 2, 1}));
  ASSERT_EQ(t.nodes().size(), 1u);
  std::vector<float> x{1.0f};
  EXPECT_EQ(t.predict(x), 1);
}

TEST(Train, XorNeedsZeroGainSplit) {
  LabeledVectors v{{}, {"a", "b"}, 0};
  v.rows = {{{0, 0}, 0}, {{0, 1}, 1}, {{1, 0}, 1}, {{1, 1}, 0}};
  DecisionTree t = train(v);
  EXPECT_EQ(training_accuracy(t, v), 1.0);
}

TEST(Train, ConsistentDataIsFitExactly) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    LabeledVectors v = random_dataset(rng, 60);
    // Drop rows whose feature vector already appeared with another label.
    LabeledVectors consistent{{}, v.band_names, 0};
    for (const auto& r : v.rows) {
      bool clash = std::any_of(consistent.rows.begin(), consistent.rows.end(),
                               [&](const LabeledRow& o) { return o.x == r.x && o.y != r.y; });
      if (!clash) consistent.rows.push_back(r);
    }
    DecisionTree t = train(consistent);
    ASSERT_EQ(training_accuracy(t, consistent), 1.0) << "trial " << trial;
  }
}

TEST(Train, FusedTrainingSetFitsQuickly) {
  SceneConfig cfg = terrafuse::testing::small_scene(256, 42);
  auto truth = generate_truth(cfg);
  auto fused = build_fused_composite(build_optical_composite(generate_optical_series(truth, cfg)),
                                     build_sar_composite(generate_sar_series(truth, cfg)));
  auto pins = auto_sample(truth, {{kWater, 78}, {kUrban, 53}, {kNonUrban, 70}}, 85, 3.0);
  auto rows = extract_features(pins, fused);
  auto start = std::chrono::steady_clock::now();
  DecisionTree t = train(rows);
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(seconds, 1.0);
  EXPECT_GE(training_accuracy(t, rows), 0.95);
  EXPECT_LE(t.depth(), 12u);
}

TEST(Train, RespectsMinLeafAndMaxDepth) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    LabeledVectors v = random_dataset(rng, 80);
    TrainParams p;
    p.min_leaf_samples = 4;
    p.max_depth = 3;
    DecisionTree t = train(v, p);
    ASSERT_LE(t.depth(), 3u);
    for (const auto& n : t.nodes())
      if (const auto* leaf = std::get_if<DecisionTree::Leaf>(&n)) {
        std::size_t total = 0;
        for (auto c : leaf->counts) total += c;
        if (t.nodes().size() > 1) ASSERT_GE(total, 4u);
      }
  }
  TrainParams bad;
  bad.max_depth = 0;
  EXPECT_EQ(kind_of([&] { train(one_feature({1, 2}, {0, 1}), bad); }), ErrorKind::Config);
}

TEST(Train, MinImpurityDecreaseStopsWeakSplits) {
  auto v = one_feature({1, 2, 3, 4}, {0, 1, 0, 1});
  TrainParams p;
  p.min_impurity_decrease = 0.3;
  EXPECT_EQ(train(v, p).nodes().size(), 1u);
}

TEST(Train, InvariantUnderMonotoneRescaleAndRowOrder) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    LabeledVectors v = random_dataset(rng, 60);
    LabeledVectors scaled = v;
    for (auto& r : scaled.rows)
      for (auto& x : r.x) x = x * 4.0f + 100.0f;
    LabeledVectors shuffled = v;
    std::shuffle(shuffled.rows.begin(), shuffled.rows.end(), rng);
    DecisionTree a = train(v), b = train(scaled), c = train(shuffled);
    ASSERT_EQ(a.nodes().size(), b.nodes().size());
    ASSERT_EQ(serialize_tree(a), serialize_tree(c)) << "trial " << trial;
    for (std::size_t i = 0; i < v.rows.size(); ++i)
      ASSERT_EQ(a.predict(v.rows[i].x), b.predict(scaled.rows[i].x));
  }
}

TEST(Tree, PredictAtThresholdGoesLeft) {
  DecisionTree t({DecisionTree::Split{0, 0.5, 1, 2}, DecisionTree::Leaf{0, {1, 0}},
                  DecisionTree::Leaf{1, {0, 1}}},
                 {"f"});
  std::vector<float> at{0.5f}, above{std::nextafter(0.5f, 1.0f)};
  EXPECT_EQ(t.predict(at), 0);
  EXPECT_EQ(t.predict(above), 1);
  std::vector<std::vector<float>> batch{{0.0f}, {1.0f}, {0.5f}};
  EXPECT_EQ(t.predict_batch(batch), (std::vector<std::uint8_t>{0, 1, 0}));
}

TEST(Tree, RejectsMalformedGraphs) {
  using S = DecisionTree::Split;
  using L = DecisionTree::Leaf;
  EXPECT_EQ(kind_of([] { DecisionTree({}, {"f"}); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { DecisionTree({S{0, 0.0, 0, 1}, L{0, {1}}}, {"f"}); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { DecisionTree({S{1, 0.0, 1, 2}, L{0, {1}}, L{0, {1}}}, {"f"}); }),
            ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { DecisionTree({L{0, {1}}, L{0, {1}}}, {"f"}); }), ErrorKind::Parse);
}

TEST(Tree, SerializationRoundTripIsFixedPoint) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    LabeledVectors v = random_dataset(rng, 200);
    for (auto& r : v.rows)
      for (auto& x : r.x) x += std::uniform_real_distribution<float>(-0.01f, 0.01f)(rng);
    DecisionTree t = train(v);
    ASSERT_LE(t.depth(), 12u);
    std::string text = serialize_tree(t);
    DecisionTree back = parse_tree(text);
    ASSERT_EQ(serialize_tree(back), text);
    for (const auto& r : v.rows) ASSERT_EQ(back.predict(r.x), t.predict(r.x));
  }
}

TEST(Tree, ParseRejectsBrokenDocuments) {
  DecisionTree t = train(one_feature({1, 2, 9, 10}, {0, 0, 1, 1}));
  std::string text = serialize_tree(t);
  EXPECT_EQ(kind_of([&] { parse_tree(text.substr(0, text.size() / 2)); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { parse_tree(R"({"format":"other"})"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] {
              parse_tree(R"({"format":"terrafuse-tree","version":1,"band_names":["a"],
                "root":{"type":"split","feature":3,"threshold":1,
                  "left":{"type":"leaf","class":0,"counts":[1]},
                  "right":{"type":"leaf","class":0,"counts":[1]}}})");
            }),
            ErrorKind::Parse);
}
