#include "terrafuse/pipeline.hpp"

#include <algorithm>

#include <json.hpp>

#include "terrafuse/classify.hpp"
#include "terrafuse/compositing.hpp"
#include "terrafuse/error.hpp"
#include "terrafuse/io_util.hpp"
#include "terrafuse/scene_sim.hpp"

namespace terrafuse {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Source s) { return s == Source::Optical ? "optical" : "fused"; }

Source parse_source(std::string_view s) {
  if (s == "optical") return Source::Optical;
  if (s == "fused") return Source::Fused;
  throw Error(ErrorKind::Parse, "unknown source '" + std::string(s) + "' (optical|fused)");
}

DecisionTree train_from_samples(const SampleSet& samples, const BandStack& stack,
                                const TrainParams& params) {
  return train(extract_features(samples, stack), params);
}

AccuracyReport validate_with_samples(const DecisionTree& tree, const SampleSet& samples,
                                     const BandStack& stack, const Legend& legend) {
  if (samples.features.empty()) throw Error(ErrorKind::EmptyValidationSet, "no validation pins");
  return accuracy_metrics(confusion_matrix(tree, extract_features(samples, stack), legend));
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"simulate", "composite", "train",  "classify",
                                              "validate", "compare",   "render"};
  return names;
}

namespace {

constexpr Source kSources[] = {Source::Optical, Source::Fused};

void write_render(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  fs::create_directories(path.parent_path());
  write_bytes(path, bytes);
}

}  // namespace

Pipeline::Pipeline(PipelineConfig cfg, std::string config_digest, fs::path out)
    : cfg_(std::move(cfg)), config_digest_(std::move(config_digest)), layout_{std::move(out)} {}

void Pipeline::run(std::string_view stage) {
  if (stage == "simulate") return simulate();
  if (stage == "composite") return composite();
  if (stage == "train") return train();
  if (stage == "classify") return classify();
  if (stage == "validate") return validate();
  if (stage == "compare") return compare();
  if (stage == "render") return render();
  throw Error(ErrorKind::Config, "unknown stage '" + std::string(stage) + "'");
}

SampleSet Pipeline::training_samples() const {
  return parse_samples(read_text(cfg_.samples.train_path.value_or(layout_.training_samples())));
}

SampleSet Pipeline::validation_samples() const {
  return parse_samples(read_text(cfg_.samples.validation_path.value_or(layout_.validation_samples())));
}

void Pipeline::staged(const std::string& stage, const std::function<void(const Layout&)>& body) {
  const fs::path staging = layout_.root / (".staging-" + stage);
  std::error_code ec;
  fs::remove_all(staging, ec);
  fs::create_directories(staging, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + staging.string() + ": " + ec.message());
  try {
    body(layout_.rebased(staging));
    record(stage, staging);
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
  fs::remove_all(staging, ec);
}

void Pipeline::record(const std::string& stage, const fs::path& staging) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(staging))
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), staging));
  std::sort(files.begin(), files.end());

  json artifacts = json::object();
  for (const auto& rel : files) {
    artifacts[rel.generic_string()] = sha256_hex(read_text(staging / rel));
    fs::path target = layout_.root / rel;
    fs::create_directories(target.parent_path());
    std::error_code ec;
    fs::rename(staging / rel, target, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot publish " + target.string() + ": " + ec.message());
  }

  json manifest;
  if (fs::exists(layout_.manifest())) {
    try {
      manifest = json::parse(read_text(layout_.manifest()));
    } catch (const json::exception&) {
      manifest = json::object();
    }
  }
  // A manifest from another config or seed describes a different run.
  if (!manifest.is_object() || manifest.value("config_sha256", "") != config_digest_ ||
      manifest.value("seed", std::uint64_t{0}) != cfg_.scene.seed) {
    manifest = json::object();
  }
  manifest["tool"] = "terrafuse";
  manifest["version"] = kVersion;
  manifest["config_sha256"] = config_digest_;
  manifest["seed"] = cfg_.scene.seed;
  manifest["stages"][stage] = {{"artifacts", artifacts}};
  write_text(layout_.manifest(), manifest.dump(2) + "\n");
}

void Pipeline::simulate() {
  staged("simulate", [&](const Layout& out) {
    ClassMap truth = generate_truth(cfg_.scene);
    write_classmap(truth, out.truth());
    write_collection(generate_optical_series(truth, cfg_.scene), out.collection(Sensor::Optical));
    write_collection(generate_sar_series(truth, cfg_.scene), out.collection(Sensor::Sar));

    fs::create_directories(out.training_samples().parent_path());
    SampleSet training = cfg_.samples.train_path
                             ? parse_samples(read_text(*cfg_.samples.train_path))
                             : auto_sample(truth, cfg_.samples.train_counts, cfg_.train_seed(),
                                           cfg_.samples.min_spacing);
    SampleSet validation = cfg_.samples.validation_path
                               ? parse_samples(read_text(*cfg_.samples.validation_path))
                               : auto_sample(truth, cfg_.samples.validation_counts,
                                             cfg_.validation_seed(), cfg_.samples.min_spacing,
                                             &training);
    write_text(out.training_samples(), serialize_samples(training));
    write_text(out.validation_samples(), serialize_samples(validation));
  });
}

void Pipeline::composite() {
  staged("composite", [&](const Layout& out) {
    auto optical = filter_collection(read_collection(layout_.collection(Sensor::Optical)),
                                     cfg_.optical_filter());
    auto sar = filter_collection(read_collection(layout_.collection(Sensor::Sar)), cfg_.sar_filter());
    BandStack optical_stack = build_optical_composite(optical);
    BandStack sar_stack = build_sar_composite(sar);
    write_stack(optical_stack, out.optical_composite());
    write_stack(sar_stack, out.sar_composite());
    write_stack(build_fused_composite(optical_stack, sar_stack), out.composite(Source::Fused));
  });
}

void Pipeline::train() {
  staged("train", [&](const Layout& out) {
    SampleSet samples = training_samples();
    fs::create_directories(out.tree(Source::Optical).parent_path());
    for (Source s : kSources) {
      DecisionTree tree = train_from_samples(samples, read_stack(layout_.composite(s)), cfg_.train_params);
      write_text(out.tree(s), serialize_tree(tree));
    }
  });
}

void Pipeline::classify() {
  staged("classify", [&](const Layout& out) {
    const Legend legend = cfg_.scene.legend();
    for (Source s : kSources) {
      DecisionTree tree = parse_tree(read_text(layout_.tree(s)));
      ClassMap map = classify_stack(tree, read_stack(layout_.composite(s)), legend);
      write_classmap(map, out.classmap(s));
      write_render(out.renders() / ("classmap_" + std::string(to_string(s)) + ".ppm"),
                   render_classmap(map, cfg_.palette));
    }
  });
}

void Pipeline::validate() {
  staged("validate", [&](const Layout& out) {
    SampleSet samples = validation_samples();
    const Legend legend = cfg_.scene.legend();
    fs::create_directories(out.report(Source::Optical).parent_path());
    for (Source s : kSources) {
      DecisionTree tree = parse_tree(read_text(layout_.tree(s)));
      AccuracyReport report = validate_with_samples(tree, samples, read_stack(layout_.composite(s)), legend);
      write_text(out.report(s), report_to_json(report));
      fs::path text = out.report(s);
      text.replace_extension(".txt");
      write_text(text, report_to_text(report));
    }
  });
}

void Pipeline::compare() {
  staged("compare", [&](const Layout& out) {
    Comparison c = compare_report(report_from_json(read_text(layout_.report(Source::Optical))),
                                  report_from_json(read_text(layout_.report(Source::Fused))));
    fs::create_directories(out.comparison().parent_path());
    write_text(out.comparison(), comparison_to_json(c));
    fs::path text = out.comparison();
    text.replace_extension(".txt");
    write_text(text, comparison_to_text(c));
  });
}

void Pipeline::render() {
  staged("render", [&](const Layout& out) {
    BandStack optical = read_stack(layout_.optical_composite());
    write_render(out.renders() / "optical_true_color.ppm", render_composite(optical, cfg_.true_color));
    BandStack sar = read_stack(layout_.sar_composite());
    write_render(out.renders() / "sar_vv_vh_ratio.ppm", render_composite(sar, {"VV", "VH", "ratio"}));
    if (fs::exists(layout_.truth()))
      write_render(out.renders() / "truth.ppm", render_classmap(read_classmap(layout_.truth()), cfg_.palette));
    for (Source s : kSources)
      if (fs::exists(layout_.classmap(s)))
        write_render(out.renders() / ("classmap_" + std::string(to_string(s)) + ".ppm"),
                     render_classmap(read_classmap(layout_.classmap(s)), cfg_.palette));
  });
}

}  // namespace terrafuse
