#include "terrafuse/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "terrafuse/error.hpp"

namespace terrafuse {

using nlohmann::json;

double gini(std::span<const std::size_t> counts) {
  std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) throw Error(ErrorKind::EmptyCounts, "gini of an empty node");
  double sum_sq = 0.0;
  for (auto c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

namespace {

using Wide = __int128;

/// Exact split score: sum_c L_c^2 / nL + sum_c R_c^2 / nR as a fraction.
/// Larger score means lower weighted Gini.
struct Score {
  Wide num = 0;
  Wide den = 1;

  bool better_than(const Score& o) const { return num * o.den > o.num * den; }
  bool equals(const Score& o) const { return num * o.den == o.num * den; }
};

Score split_score(std::span<const std::size_t> left, std::size_t n_left,
                  std::span<const std::size_t> right, std::size_t n_right) {
  Wide sl = 0, sr = 0;
  for (auto c : left) sl += static_cast<Wide>(c) * static_cast<Wide>(c);
  for (auto c : right) sr += static_cast<Wide>(c) * static_cast<Wide>(c);
  return {sl * static_cast<Wide>(n_right) + sr * static_cast<Wide>(n_left),
          static_cast<Wide>(n_left) * static_cast<Wide>(n_right)};
}

double weighted_gini(std::span<const std::size_t> left, std::size_t n_left,
                     std::span<const std::size_t> right, std::size_t n_right) {
  double n = static_cast<double>(n_left + n_right);
  return static_cast<double>(n_left) / n * gini(left) +
         static_cast<double>(n_right) / n * gini(right);
}

std::size_t class_slots(const LabeledVectors& data) {
  std::size_t k = 0;
  for (const auto& r : data.rows) k = std::max<std::size_t>(k, r.y + 1u);
  return k;
}

void check_rows(const LabeledVectors& data) {
  for (const auto& r : data.rows)
    if (r.x.size() != data.feature_count())
      throw Error(ErrorKind::DimensionMismatch, "row width differs from band count");
}

struct SearchResult {
  SplitCandidate split;
  Score score;
};

std::optional<SearchResult> search(const LabeledVectors& data, std::span<const std::size_t> rows,
                                   std::size_t classes, std::size_t min_leaf) {
  const std::size_t n = rows.size();
  if (n < 2 || n < 2 * min_leaf) return std::nullopt;

  std::vector<std::size_t> total(classes, 0);
  for (auto r : rows) ++total[data.rows[r].y];

  std::optional<SearchResult> best;
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::vector<std::size_t> left(classes), right(classes);
  for (std::size_t f = 0; f < data.feature_count(); ++f) {
    auto value = [&](std::size_t r) { return data.rows[r].x[f]; };
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    std::fill(left.begin(), left.end(), 0);
    right = total;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto y = data.rows[order[i]].y;
      ++left[y];
      --right[y];
      const float lo = value(order[i]), hi = value(order[i + 1]);
      if (!(lo < hi)) continue;
      const std::size_t n_left = i + 1, n_right = n - n_left;
      if (n_left < min_leaf || n_right < min_leaf) continue;
      Score s = split_score(left, n_left, right, n_right);
      // Features and thresholds are visited in ascending order, so only a
      // strictly better score replaces the incumbent.
      if (!best || s.better_than(best->score)) {
        double threshold = (static_cast<double>(lo) + static_cast<double>(hi)) / 2.0;
        best = SearchResult{{f, threshold, weighted_gini(left, n_left, right, n_right)}, s};
      }
    }
  }
  return best;
}

struct Builder {
  const LabeledVectors& data;
  const TrainParams& params;
  std::size_t classes;
  std::vector<DecisionTree::Node> nodes;

  std::size_t grow(std::vector<std::size_t> rows, int depth) {
    std::vector<std::size_t> counts(classes, 0);
    for (auto r : rows) ++counts[data.rows[r].y];

    const std::size_t index = nodes.size();
    nodes.emplace_back(make_leaf(counts));

    const bool pure = std::count_if(counts.begin(), counts.end(),
                                    [](std::size_t c) { return c > 0; }) <= 1;
    if (pure || depth >= params.max_depth) return index;
    auto found = search(data, rows, classes, params.min_leaf_samples);
    if (!found) return index;
    if (gini(counts) - found->split.weighted_impurity < params.min_impurity_decrease) return index;

    const auto& split = found->split;
    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows)
      (static_cast<double>(data.rows[r].x[split.feature]) <= split.threshold ? left_rows
                                                                              : right_rows)
          .push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    std::size_t left = grow(std::move(left_rows), depth + 1);
    std::size_t right = grow(std::move(right_rows), depth + 1);
    nodes[index] = DecisionTree::Split{split.feature, split.threshold, left, right};
    return index;
  }

  static DecisionTree::Leaf make_leaf(const std::vector<std::size_t>& counts) {
    auto majority = std::max_element(counts.begin(), counts.end());  // first max = lowest id
    return {static_cast<std::uint8_t>(majority - counts.begin()), counts};
  }
};

}  // namespace

std::optional<SplitCandidate> best_split(const LabeledVectors& data) {
  check_rows(data);
  std::vector<std::size_t> rows(data.rows.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  auto found = search(data, rows, class_slots(data), 1);
  if (!found) return std::nullopt;
  return found->split;
}

void TrainParams::validate() const {
  if (max_depth < 1) throw Error(ErrorKind::Config, "max_depth must be >= 1");
  if (min_leaf_samples < 1) throw Error(ErrorKind::Config, "min_leaf_samples must be >= 1");
  if (!(min_impurity_decrease >= 0.0) || !std::isfinite(min_impurity_decrease))
    throw Error(ErrorKind::Config, "min_impurity_decrease must be finite and >= 0");
}

DecisionTree train(const LabeledVectors& data, const TrainParams& params) {
  params.validate();
  if (data.rows.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no training rows");
  if (data.feature_count() == 0) throw Error(ErrorKind::DimensionMismatch, "no features");
  check_rows(data);
  Builder builder{data, params, class_slots(data), {}};
  std::vector<std::size_t> rows(data.rows.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  builder.grow(std::move(rows), 0);
  return DecisionTree(std::move(builder.nodes), data.band_names);
}

DecisionTree::DecisionTree(std::vector<Node> nodes, std::vector<std::string> band_names)
    : nodes_(std::move(nodes)), band_names_(std::move(band_names)) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Parse, "invalid tree: " + msg); };
  if (nodes_.empty()) fail("no nodes");
  std::vector<int> parents(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (const auto* s = std::get_if<Split>(&nodes_[i])) {
      if (s->feature >= band_names_.size()) fail("split feature out of range");
      if (!std::isfinite(s->threshold)) fail("non-finite threshold");
      if (s->left <= i || s->right <= i || s->left >= nodes_.size() ||
          s->right >= nodes_.size() || s->left == s->right)
        fail("bad child index");
      ++parents[s->left];
      ++parents[s->right];
    } else {
      const auto& leaf = std::get<Leaf>(nodes_[i]);
      if (leaf.counts.empty()) fail("leaf without counts");
    }
  }
  if (parents[0] != 0) fail("root has a parent");
  for (std::size_t i = 1; i < parents.size(); ++i)
    if (parents[i] != 1) fail("node " + std::to_string(i) + " is not reached exactly once");
}

std::uint8_t DecisionTree::predict(std::span<const float> x) const {
  if (x.size() != band_names_.size())
    throw Error(ErrorKind::DimensionMismatch, "feature vector has " + std::to_string(x.size()) +
                                                  " values, tree expects " +
                                                  std::to_string(band_names_.size()));
  std::size_t i = 0;
  while (const auto* s = std::get_if<Split>(&nodes_[i]))
    i = static_cast<double>(x[s->feature]) <= s->threshold ? s->left : s->right;
  return std::get<Leaf>(nodes_[i]).class_id;
}

std::vector<std::uint8_t> DecisionTree::predict_batch(std::span<const std::vector<float>> xs) const {
  std::vector<std::uint8_t> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(predict(x));
  return out;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (const auto* s = std::get_if<Split>(&nodes_[i])) level[s->left] = level[s->right] = level[i] + 1;
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) {
    return std::holds_alternative<Leaf>(n);
  }));
}

namespace {

json node_to_json(const DecisionTree& tree, std::size_t i) {
  const auto& node = tree.nodes()[i];
  if (const auto* s = std::get_if<DecisionTree::Split>(&node)) {
    return json{{"type", "split"},
                {"feature", s->feature},
                {"threshold", s->threshold},
                {"left", node_to_json(tree, s->left)},
                {"right", node_to_json(tree, s->right)}};
  }
  const auto& leaf = std::get<DecisionTree::Leaf>(node);
  return json{{"type", "leaf"}, {"class", leaf.class_id}, {"counts", leaf.counts}};
}

std::size_t node_from_json(const json& j, std::vector<DecisionTree::Node>& nodes, int depth) {
  if (depth > 4096) throw Error(ErrorKind::Parse, "tree nesting too deep");
  const std::string type = j.at("type").get<std::string>();
  const std::size_t index = nodes.size();
  if (type == "leaf") {
    int cls = j.at("class").get<int>();
    if (cls < 0 || cls > 254) throw Error(ErrorKind::Parse, "leaf class out of range");
    nodes.emplace_back(DecisionTree::Leaf{static_cast<std::uint8_t>(cls),
                                          j.at("counts").get<std::vector<std::size_t>>()});
    return index;
  }
  if (type != "split") throw Error(ErrorKind::Parse, "unknown node type '" + type + "'");
  nodes.emplace_back(DecisionTree::Split{});
  DecisionTree::Split split;
  split.feature = j.at("feature").get<std::size_t>();
  if (!j.at("threshold").is_number()) throw Error(ErrorKind::Parse, "threshold must be a number");
  split.threshold = j.at("threshold").get<double>();
  split.left = node_from_json(j.at("left"), nodes, depth + 1);
  split.right = node_from_json(j.at("right"), nodes, depth + 1);
  nodes[index] = split;
  return index;
}

}  // namespace

std::string serialize_tree(const DecisionTree& tree) {
  json doc{{"format", "terrafuse-tree"},
           {"version", 1},
           {"band_names", tree.band_names()},
           {"root", node_to_json(tree, 0)}};
  return doc.dump(1) + "\n";
}

DecisionTree parse_tree(std::string_view text) {
  try {
    json doc = json::parse(text);
    if (!doc.is_object() || doc.value("format", "") != "terrafuse-tree")
      throw Error(ErrorKind::Parse, "not a tree document");
    if (doc.value("version", 0) != 1) throw Error(ErrorKind::Parse, "unsupported tree version");
    std::vector<DecisionTree::Node> nodes;
    node_from_json(doc.at("root"), nodes, 0);
    return DecisionTree(std::move(nodes), doc.at("band_names").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed tree document: ") + e.what());
  }
}

}  // namespace terrafuse
