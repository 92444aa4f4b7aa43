#include "terrafuse/service.hpp"

#include <httplib.h>

#include <json.hpp>

#include "terrafuse/classify.hpp"
#include "terrafuse/error.hpp"
#include "terrafuse/io_util.hpp"

namespace terrafuse {

namespace fs = std::filesystem;
using nlohmann::json;

struct Service::Published {
  std::map<std::string, std::string> samples;  // set name -> canonical GeoJSON
  std::map<Source, std::shared_ptr<const DecisionTree>> trees;
  std::map<Source, std::shared_ptr<const ClassMap>> classmaps;
  std::map<Source, AccuracyReport> reports;
  std::map<Source, std::string> pins;
};

namespace {

constexpr const char* kPpm = "image/x-portable-pixmap";
constexpr const char* kJson = "application/json";
constexpr const char* kGeoJson = "application/geo+json";

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Parse:
    case ErrorKind::Format:
    case ErrorKind::MissingBand:
      return 400;
    case ErrorKind::EmptyResult:
      return 404;
    case ErrorKind::Internal:
    case ErrorKind::Io:
      return 500;
    default:
      return 422;
  }
}

void send_error(httplib::Response& res, int status, std::string_view category, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", category}, {"message", message}}.dump(), kJson);
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorKind::Parse, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed request body: ") + e.what());
  }
}

std::string sample_set_name(const httplib::Request& req) {
  std::string set = req.has_param("set") ? req.get_param_value("set") : "training";
  if (set != "training" && set != "validation")
    throw Error(ErrorKind::Parse, "set must be training or validation");
  return set;
}

Source source_param(const httplib::Request& req, const json& body) {
  if (body.contains("source")) return parse_source(body["source"].get<std::string>());
  if (req.has_param("source")) return parse_source(req.get_param_value("source"));
  return Source::Fused;
}

TrainParams params_from(const json& j, TrainParams base) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "params must be an object");
  if (j.contains("max_depth")) base.max_depth = j["max_depth"].get<int>();
  if (j.contains("min_leaf_samples")) base.min_leaf_samples = j["min_leaf_samples"].get<std::size_t>();
  if (j.contains("min_impurity_decrease")) base.min_impurity_decrease = j["min_impurity_decrease"].get<double>();
  base.validate();
  return base;
}

json geometry_json(const BandStack& s) {
  const auto& t = s.transform();
  return {{"width", s.width()},
          {"height", s.height()},
          {"transform",
           {{"origin_x", t.origin_x}, {"origin_y", t.origin_y}, {"pixel_w", t.pixel_w}, {"pixel_h", t.pixel_h}}}};
}

/// Wraps a handler so domain errors become JSON error responses.
template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e.kind()), to_string(e.kind()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "ParseError", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    }
  };
}

}  // namespace

Service::Service(Pipeline pipeline)
    : pipeline_(std::move(pipeline)), legend_(pipeline_.config().scene.legend()),
      server_(std::make_unique<httplib::Server>()) {
  // Without SO_REUSEPORT a second server on the same port fails to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  const Layout& layout = pipeline_.layout();
  if (!fs::exists(layout.composite(Source::Fused) / "stack.json") ||
      !fs::exists(layout.optical_composite() / "stack.json")) {
    if (!fs::exists(layout.collection(Sensor::Optical) / "collection.json")) pipeline_.simulate();
    pipeline_.composite();
  }
  optical_ = std::make_shared<const BandStack>(read_stack(layout.optical_composite()));
  fused_ = std::make_shared<const BandStack>(read_stack(layout.composite(Source::Fused)));

  // Resume whatever an earlier session left behind.
  auto state = std::make_shared<Published>();
  const fs::path session = session_dir();
  for (const std::string set : {"training", "validation"}) {
    fs::path stored = session / "samples" / (set + ".geojson");
    if (fs::exists(stored)) {
      state->samples[set] = serialize_samples(parse_samples(read_text(stored)));
    } else if (set == "training") {
      SampleSet initial;
      initial.legend = legend_;
      if (fs::exists(layout.training_samples()) || pipeline_.config().samples.train_path)
        initial = pipeline_.training_samples();
      state->samples[set] = serialize_samples(initial);
    }
  }
  for (Source s : {Source::Optical, Source::Fused}) {
    const std::string name(to_string(s));
    if (fs::exists(session / "trees" / (name + ".json")))
      state->trees[s] = std::make_shared<const DecisionTree>(
          parse_tree(read_text(session / "trees" / (name + ".json"))));
    if (fs::exists(session / "classmaps" / name / "classmap.json"))
      state->classmaps[s] = std::make_shared<const ClassMap>(read_classmap(session / "classmaps" / name));
    if (fs::exists(session / "reports" / (name + ".json")))
      state->reports[s] = report_from_json(read_text(session / "reports" / (name + ".json")));
    if (fs::exists(session / "reports" / (name + "_pins.json")))
      state->pins[s] = read_text(session / "reports" / (name + "_pins.json"));
  }
  state_ = std::move(state);
  install_routes();
}

Service::~Service() { stop(); }

fs::path Service::session_dir() const { return pipeline_.layout().root / "session"; }

std::shared_ptr<const Service::Published> Service::snapshot() const {
  std::lock_guard lock(publish_mutex_);
  return state_;
}

void Service::publish(std::shared_ptr<const Published> next) {
  std::lock_guard lock(publish_mutex_);
  state_ = std::move(next);
}

const BandStack& Service::stack_for(Source s) const { return s == Source::Optical ? *optical_ : *fused_; }

void Service::persist_samples(const std::string& set, const SampleSet& samples) {
  fs::create_directories(session_dir() / "samples");
  write_text(session_dir() / "samples" / (set + ".geojson"), serialize_samples(samples));
}

SampleSet Service::samples_for(const Published& state, const std::string& ref) const {
  if (ref != "training" && ref != "validation")
    throw Error(ErrorKind::Parse, "samples_ref must be training or validation");
  auto it = state.samples.find(ref);
  if (it != state.samples.end()) return parse_samples(it->second);
  return pipeline_.validation_samples();
}

void Service::install_routes() {
  httplib::Server& srv = *server_;

  srv.Get("/api/meta", guarded([this](const httplib::Request&, httplib::Response& res) {
    auto state = snapshot();
    json legend = json::array(), palette = json::object(), trained = json::array();
    for (const auto& [id, name] : legend_) {
      legend.push_back({{"id", id}, {"name", name}});
      auto it = pipeline_.config().palette.colors.find(id);
      if (it != pipeline_.config().palette.colors.end()) palette[name] = it->second;
    }
    palette["nodata"] = pipeline_.config().palette.nodata;
    for (const auto& [s, tree] : state->trees) trained.push_back(to_string(s));
    json meta = geometry_json(*fused_);
    meta["bands"] = {{"optical", optical_->band_names()}, {"fused", fused_->band_names()}};
    meta["legend"] = legend;
    meta["palette"] = palette;
    meta["trained"] = trained;
    meta["true_color"] = pipeline_.config().true_color;
    res.set_content(meta.dump(), kJson);
  }));

  srv.Get("/api/render/composite", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto& tc = pipeline_.config().true_color;
    std::array<std::string, 3> bands{req.has_param("r") ? req.get_param_value("r") : tc[0],
                                     req.has_param("g") ? req.get_param_value("g") : tc[1],
                                     req.has_param("b") ? req.get_param_value("b") : tc[2]};
    Stretch stretch;
    if (req.has_param("low")) stretch.low_percentile = std::stod(req.get_param_value("low"));
    if (req.has_param("high")) stretch.high_percentile = std::stod(req.get_param_value("high"));
    auto bytes = render_composite(*fused_, bands, stretch);
    res.set_content(std::string(bytes.begin(), bytes.end()), kPpm);
  }));

  srv.Get("/api/render/classmap", guarded([this](const httplib::Request& req, httplib::Response& res) {
    Source s = source_param(req, json::object());
    auto state = snapshot();
    auto it = state->classmaps.find(s);
    if (it == state->classmaps.end())
      return send_error(res, 404, "EmptyResult", "no class map for " + std::string(to_string(s)) + " yet");
    auto bytes = render_classmap(*it->second, pipeline_.config().palette);
    res.set_content(std::string(bytes.begin(), bytes.end()), kPpm);
  }));

  srv.Get("/api/samples", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string set = sample_set_name(req);
    auto state = snapshot();
    auto it = state->samples.find(set);
    if (it != state->samples.end()) return res.set_content(it->second, kGeoJson);
    res.set_content(serialize_samples(pipeline_.validation_samples()), kGeoJson);
  }));

  srv.Post("/api/samples", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::unique_lock job(job_mutex_, std::try_to_lock);
    if (!job.owns_lock()) return send_error(res, 409, "busy", "another job is running");
    const std::string set = sample_set_name(req);
    SampleSet samples = parse_samples(req.body);
    for (const auto& [id, name] : samples.legend)
      if (!legend_.count(id)) throw Error(ErrorKind::LegendMismatch, "unknown class " + name);
    persist_samples(set, samples);
    auto next = std::make_shared<Published>(*snapshot());
    next->samples[set] = serialize_samples(samples);
    publish(std::move(next));
    res.set_content(json{{"set", set}, {"count", samples.features.size()}}.dump(), kJson);
  }));

  srv.Post("/api/train", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::unique_lock job(job_mutex_, std::try_to_lock);
    if (!job.owns_lock()) return send_error(res, 409, "busy", "another job is running");
    json body = parse_body(req);
    Source s = source_param(req, body);
    TrainParams params = params_from(body.value("params", json::object()), pipeline_.config().train_params);
    auto state = snapshot();
    SampleSet samples = samples_for(*state, "training");
    LabeledVectors rows = extract_features(samples, stack_for(s));
    auto tree = std::make_shared<const DecisionTree>(train(rows, params));

    fs::create_directories(session_dir() / "trees");
    write_text(session_dir() / "trees" / (std::string(to_string(s)) + ".json"), serialize_tree(*tree));
    auto next = std::make_shared<Published>(*state);
    next->trees[s] = tree;
    next->classmaps.erase(s);
    next->reports.erase(s);
    next->pins.erase(s);
    publish(std::move(next));
    res.set_content(json{{"source", to_string(s)},
                         {"rows", rows.rows.size()},
                         {"dropped", rows.dropped},
                         {"depth", tree->depth()},
                         {"leaves", tree->leaf_count()}}
                        .dump(),
                    kJson);
  }));

  srv.Post("/api/classify", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::unique_lock job(job_mutex_, std::try_to_lock);
    if (!job.owns_lock()) return send_error(res, 409, "busy", "another job is running");
    json body = parse_body(req);
    Source s = source_param(req, body);
    auto state = snapshot();
    auto it = state->trees.find(s);
    if (it == state->trees.end())
      return send_error(res, 404, "EmptyResult", "train the " + std::string(to_string(s)) + " tree first");
    auto map = std::make_shared<const ClassMap>(classify_stack(*it->second, stack_for(s), legend_));
    write_classmap(*map, session_dir() / "classmaps" / std::string(to_string(s)));

    json histogram = json::object();
    std::array<std::size_t, 256> counts{};
    for (auto l : map->labels()) ++counts[l];
    for (const auto& [id, name] : legend_) histogram[name] = counts[id];
    histogram["nodata"] = counts[kNodataLabel];

    auto next = std::make_shared<Published>(*state);
    next->classmaps[s] = map;
    publish(std::move(next));
    res.set_content(json{{"source", to_string(s)}, {"pixels", histogram}}.dump(), kJson);
  }));

  srv.Post("/api/validate", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::unique_lock job(job_mutex_, std::try_to_lock);
    if (!job.owns_lock()) return send_error(res, 409, "busy", "another job is running");
    json body = parse_body(req);
    auto state = snapshot();
    SampleSet samples = samples_for(*state, body.value("samples_ref", std::string("validation")));

    std::vector<Source> sources;
    if (body.contains("source") || req.has_param("source")) {
      sources.push_back(source_param(req, body));
    } else {
      for (const auto& [s, tree] : state->trees) sources.push_back(s);
    }
    if (sources.empty()) return send_error(res, 404, "EmptyResult", "no trained tree to validate");

    auto next = std::make_shared<Published>(*state);
    json all = json::object();
    std::string single_text;
    fs::create_directories(session_dir() / "reports");
    for (Source s : sources) {
      auto it = state->trees.find(s);
      if (it == state->trees.end())
        return send_error(res, 404, "EmptyResult", "train the " + std::string(to_string(s)) + " tree first");
      const DecisionTree& tree = *it->second;
      AccuracyReport report = validate_with_samples(tree, samples, stack_for(s), legend_);

      // Per-pin outcome so a client can highlight misclassified pins.
      json pins = json::array();
      const BandStack& stack = stack_for(s);
      for (const auto& pin : samples.features) {
        PixelIndex px = geo_to_pixel(stack.transform(), pin.lon, pin.lat);
        json entry{{"lon", pin.lon}, {"lat", pin.lat}, {"class", pin.class_id}, {"predicted", nullptr}};
        if (stack.in_bounds(px)) {
          std::vector<float> x;
          bool valid = true;
          for (const auto& b : stack.bands()) {
            float v = b.values[static_cast<std::size_t>(px.row) * static_cast<std::size_t>(stack.width()) +
                               static_cast<std::size_t>(px.col)];
            valid = valid && !b.is_nodata(v);
            x.push_back(v);
          }
          if (valid) entry["predicted"] = tree.predict(x);
        }
        pins.push_back(std::move(entry));
      }
      const std::string name(to_string(s));
      const std::string report_text = report_to_json(report);
      write_text(session_dir() / "reports" / (name + ".json"), report_text);
      write_text(session_dir() / "reports" / (name + "_pins.json"), pins.dump());
      next->reports[s] = report;
      next->pins[s] = pins.dump();
      all[name] = json::parse(report_text);
      single_text = report_text;
    }
    publish(std::move(next));
    if (sources.size() == 1)
      res.set_content(single_text, kJson);
    else
      res.set_content(all.dump(2) + "\n", kJson);
  }));

  srv.Get("/api/report/compare", guarded([this](const httplib::Request&, httplib::Response& res) {
    auto state = snapshot();
    auto opt = state->reports.find(Source::Optical);
    auto fus = state->reports.find(Source::Fused);
    if (opt == state->reports.end() || fus == state->reports.end())
      return send_error(res, 404, "EmptyResult", "validate both optical and fused trees first");
    res.set_content(comparison_to_json(compare_report(opt->second, fus->second)), kJson);
  }));

  srv.Get("/api/report/pins", guarded([this](const httplib::Request& req, httplib::Response& res) {
    Source s = source_param(req, json::object());
    auto state = snapshot();
    auto it = state->pins.find(s);
    if (it == state->pins.end())
      return send_error(res, 404, "EmptyResult", "validate the " + std::string(to_string(s)) + " tree first");
    res.set_content(it->second, kJson);
  }));
}

void Service::listen(const std::string& host, int port) {
  if (!server_->bind_to_port(host, port))
    throw Error(ErrorKind::PortInUse, "cannot bind " + host + ":" + std::to_string(port));
  listen_after_bind();
}

int Service::bind_any_port(const std::string& host) {
  int port = server_->bind_to_any_port(host);
  if (port < 0) throw Error(ErrorKind::PortInUse, "cannot bind any port on " + host);
  return port;
}

void Service::listen_after_bind() { server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

bool Service::running() const { return server_ && server_->is_running(); }

}  // namespace terrafuse
