#include "terrafuse/validation.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "terrafuse/error.hpp"

namespace terrafuse {

using nlohmann::json;

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

std::vector<std::size_t> ConfusionMatrix::row_sums() const {
  std::vector<std::size_t> sums;
  for (const auto& row : counts) sums.push_back(std::accumulate(row.begin(), row.end(), std::size_t{0}));
  return sums;
}

std::vector<std::size_t> ConfusionMatrix::col_sums() const {
  std::vector<std::size_t> sums(counts.size(), 0);
  for (const auto& row : counts)
    for (std::size_t j = 0; j < row.size(); ++j) sums[j] += row[j];
  return sums;
}

ConfusionMatrix empty_matrix(const Legend& legend) {
  return {legend, std::vector<std::vector<std::size_t>>(legend.size(),
                                                        std::vector<std::size_t>(legend.size(), 0))};
}

ConfusionMatrix confusion_matrix(const DecisionTree& tree, const LabeledVectors& v,
                                 const Legend& legend) {
  if (v.rows.empty()) throw Error(ErrorKind::EmptyValidationSet, "no validation rows");
  if (v.band_names != tree.band_names())
    throw Error(ErrorKind::BandOrderMismatch, "validation bands differ from training bands");
  std::array<int, 256> slot;
  slot.fill(-1);
  int k = 0;
  for (const auto& [id, name] : legend) slot[id] = k++;

  ConfusionMatrix m = empty_matrix(legend);
  for (const auto& row : v.rows) {
    auto predicted = tree.predict(row.x);
    if (slot[row.y] < 0 || slot[predicted] < 0)
      throw Error(ErrorKind::LegendMismatch, "class outside legend in validation");
    ++m.counts[static_cast<std::size_t>(slot[row.y])][static_cast<std::size_t>(slot[predicted])];
  }
  return m;
}

AccuracyReport accuracy_metrics(const ConfusionMatrix& m) {
  const std::size_t total = m.total();
  if (total == 0) throw Error(ErrorKind::EmptyMatrix, "confusion matrix holds no samples");
  const auto rows = m.row_sums();
  const auto cols = m.col_sums();
  const double n = static_cast<double>(total);

  AccuracyReport r;
  r.matrix = m;
  r.overall = static_cast<double>(m.trace()) / n;
  double expected = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    expected += static_cast<double>(rows[i]) * static_cast<double>(cols[i]);
  expected /= n * n;
  // Perfect chance agreement (a single populated class) leaves kappa at 1
  // only when observed agreement is also perfect.
  r.kappa = expected < 1.0 ? (r.overall - expected) / (1.0 - expected) : (r.overall == 1.0 ? 1.0 : 0.0);

  std::size_t i = 0;
  for (const auto& [id, name] : m.legend) {
    ClassAccuracy c{id, name, rows[i], cols[i], std::nullopt, std::nullopt};
    if (rows[i] > 0) c.producers = static_cast<double>(m.counts[i][i]) / static_cast<double>(rows[i]);
    if (cols[i] > 0) c.users = static_cast<double>(m.counts[i][i]) / static_cast<double>(cols[i]);
    r.classes.push_back(std::move(c));
    ++i;
  }
  return r;
}

Comparison compare_report(const AccuracyReport& optical, const AccuracyReport& fused) {
  if (optical.matrix.legend != fused.matrix.legend)
    throw Error(ErrorKind::LegendMismatch, "reports use different legends");
  Comparison c{optical, fused, fused.overall - optical.overall, fused.kappa - optical.kappa, {}};
  for (std::size_t i = 0; i < optical.classes.size(); ++i) {
    const auto& a = optical.classes[i];
    const auto& b = fused.classes[i];
    ClassDelta d{a.id, std::nullopt, std::nullopt};
    if (a.producers && b.producers) d.producers = *b.producers - *a.producers;
    if (a.users && b.users) d.users = *b.users - *a.users;
    c.classes.push_back(d);
  }
  return c;
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json report_json(const AccuracyReport& r) {
  json legend = json::array();
  for (const auto& [id, name] : r.matrix.legend) legend.push_back({{"id", id}, {"name", name}});
  json classes = json::array();
  for (const auto& c : r.classes) {
    classes.push_back({{"id", c.id},
                       {"name", c.name},
                       {"reference_count", c.reference_count},
                       {"predicted_count", c.predicted_count},
                       {"producers_accuracy", optional_json(c.producers)},
                       {"users_accuracy", optional_json(c.users)}});
  }
  return json{{"legend", legend},
              {"matrix", r.matrix.counts},
              {"total", r.matrix.total()},
              {"overall_accuracy", r.overall},
              {"kappa", r.kappa},
              {"classes", classes}};
}

std::string fmt3(std::optional<double> v) {
  if (!v) return "    -";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

std::string signed3(std::optional<double> v) {
  if (!v) return "     -";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.3f", *v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string report_to_json(const AccuracyReport& r) { return report_json(r).dump(2) + "\n"; }

AccuracyReport report_from_json(std::string_view text) {
  try {
    json j = json::parse(text);
    ConfusionMatrix m;
    for (const auto& e : j.at("legend"))
      m.legend[e.at("id").get<std::uint8_t>()] = e.at("name").get<std::string>();
    m.counts = j.at("matrix").get<std::vector<std::vector<std::size_t>>>();
    if (m.counts.size() != m.legend.size())
      throw Error(ErrorKind::Parse, "matrix size differs from legend size");
    for (const auto& row : m.counts)
      if (row.size() != m.legend.size()) throw Error(ErrorKind::Parse, "matrix is not square");
    AccuracyReport r = accuracy_metrics(m);
    // Stored values win over recomputation so a report round-trips exactly.
    r.overall = j.at("overall_accuracy").get<double>();
    r.kappa = j.at("kappa").get<double>();
    for (std::size_t i = 0; i < r.classes.size() && i < j.at("classes").size(); ++i) {
      r.classes[i].producers = optional_from(j["classes"][i].at("producers_accuracy"));
      r.classes[i].users = optional_from(j["classes"][i].at("users_accuracy"));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed report: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

std::string report_to_text(const AccuracyReport& r) {
  std::string out;
  out += "overall accuracy  " + fmt3(r.overall) + "\n";
  out += "kappa             " + fmt3(r.kappa) + "\n";
  out += "samples           " + std::to_string(r.matrix.total()) + "\n\n";
  out += pad("class", 12) + pad("reference", 11) + pad("producers", 11) + "users\n";
  for (const auto& c : r.classes)
    out += pad(c.name, 12) + pad(std::to_string(c.reference_count), 11) + pad(fmt3(c.producers), 11) +
           fmt3(c.users) + "\n";
  out += "\nconfusion matrix (rows reference, columns predicted)\n" + pad("", 12);
  for (const auto& [id, name] : r.matrix.legend) out += pad(name, 11);
  out += "\n";
  std::size_t i = 0;
  for (const auto& [id, name] : r.matrix.legend) {
    out += pad(name, 12);
    for (auto v : r.matrix.counts[i]) out += pad(std::to_string(v), 11);
    out += "\n";
    ++i;
  }
  return out;
}

std::string comparison_to_json(const Comparison& c) {
  json classes = json::array();
  for (const auto& d : c.classes)
    classes.push_back({{"id", d.id},
                       {"producers_delta", optional_json(d.producers)},
                       {"users_delta", optional_json(d.users)}});
  json doc{{"optical", report_json(c.optical)},
           {"fused", report_json(c.fused)},
           {"overall_delta", c.overall_delta},
           {"kappa_delta", c.kappa_delta},
           {"classes", classes}};
  return doc.dump(2) + "\n";
}

std::string comparison_to_text(const Comparison& c) {
  std::string out;
  out += pad("", 22) + pad("optical", 10) + pad("fused", 10) + "delta\n";
  out += pad("overall accuracy", 22) + pad(fmt3(c.optical.overall), 10) + pad(fmt3(c.fused.overall), 10) +
         signed3(c.overall_delta) + "\n";
  out += pad("kappa", 22) + pad(fmt3(c.optical.kappa), 10) + pad(fmt3(c.fused.kappa), 10) +
         signed3(c.kappa_delta) + "\n";
  for (std::size_t i = 0; i < c.classes.size(); ++i) {
    const auto& name = c.optical.classes[i].name;
    out += pad(name + " producers", 22) + pad(fmt3(c.optical.classes[i].producers), 10) +
           pad(fmt3(c.fused.classes[i].producers), 10) + signed3(c.classes[i].producers) + "\n";
    out += pad(name + " users", 22) + pad(fmt3(c.optical.classes[i].users), 10) +
           pad(fmt3(c.fused.classes[i].users), 10) + signed3(c.classes[i].users) + "\n";
  }
  return out;
}

}  // namespace terrafuse
