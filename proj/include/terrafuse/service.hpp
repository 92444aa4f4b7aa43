#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "terrafuse/cart.hpp"
#include "terrafuse/pipeline.hpp"
#include "terrafuse/raster.hpp"
#include "terrafuse/samples.hpp"
#include "terrafuse/validation.hpp"

namespace httplib {
class Server;
}

namespace terrafuse {

/// Local JSON-over-HTTP session for the labeling UI. Composites are loaded
/// once and never mutated; trees, class maps and reports are replaced
/// wholesale by the single writer and persisted under `<out>/session`, so a
/// restarted service resumes where it stopped.
///
/// Endpoints:
///   GET  /api/meta
///   GET  /api/render/composite?r=B4&g=B3&b=B2[&low=2&high=98]
///   GET  /api/render/classmap?source=optical|fused
///   GET  /api/samples[?set=training|validation]
///   POST /api/samples[?set=training|validation]   GeoJSON body
///   POST /api/train      {"source": ..., "params": {...}}
///   POST /api/classify   {"source": ...}
///   POST /api/validate   {"samples_ref": "validation"|"training", "source"?: ...}
///   GET  /api/report/compare
///   GET  /api/report/pins?source=...
/// Mutations that find another job running answer 409 {"error":"busy"}.
class Service {
 public:
  /// Runs `simulate`/`composite` first when the output directory lacks
  /// composites.
  explicit Service(Pipeline pipeline);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Blocks until stop(). Throws PortInUse.
  void listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; follow with listen_after_bind().
  int bind_any_port(const std::string& host);
  void listen_after_bind();
  void stop();
  bool running() const;

  std::filesystem::path session_dir() const;

 private:
  struct Published;

  void install_routes();
  std::shared_ptr<const Published> snapshot() const;
  void publish(std::shared_ptr<const Published> next);
  void persist_samples(const std::string& set, const SampleSet& samples);
  SampleSet samples_for(const Published& state, const std::string& ref) const;
  const BandStack& stack_for(Source s) const;

  Pipeline pipeline_;
  std::shared_ptr<const BandStack> optical_;
  std::shared_ptr<const BandStack> fused_;
  Legend legend_;

  mutable std::mutex publish_mutex_;
  std::shared_ptr<const Published> state_;
  std::mutex job_mutex_;

  std::unique_ptr<httplib::Server> server_;
};

}  // namespace terrafuse
