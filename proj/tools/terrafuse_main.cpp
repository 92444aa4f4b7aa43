// terrafuse command-line entry point.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "terrafuse/config.hpp"
#include "terrafuse/error.hpp"
#include "terrafuse/io_util.hpp"
#include "terrafuse/pipeline.hpp"
#include "terrafuse/service.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kInternalError = 4 };

int exit_code_for(terrafuse::ErrorKind kind) {
  switch (kind) {
    case terrafuse::ErrorKind::Config:
    case terrafuse::ErrorKind::PortInUse:
      return kConfigError;
    case terrafuse::ErrorKind::Internal:
      return kInternalError;
    default:
      return kDataError;
  }
}

void report_failure(const std::string& stage, std::string_view category, int code,
                    const std::string& message) {
  std::cerr << "terrafuse: error stage=" << stage << " category=" << category << " exit=" << code
            << " message=\"" << message << "\"\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical + SAR fusion land-cover classification pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int port = 8080;
  std::string host = "127.0.0.1";

  std::vector<CLI::App*> commands;
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option("--config", config_path, "Pipeline configuration (JSON)")->required();
    cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--seed", seed, "Override scene.seed");
    commands.push_back(cmd);
    return cmd;
  };
  add("simulate", "Generate truth, optical and SAR series, and sample pins");
  add("composite", "Filter and mean-reduce the series into optical, SAR and fused stacks");
  add("train", "Train optical-only and fused CART trees");
  add("classify", "Classify both composites and render the class maps");
  add("validate", "Build error matrices and accuracy reports");
  add("compare", "Compare optical-only and fused reports");
  add("render", "Render composites and class maps to PPM");
  add("run", "Run every stage in order");
  CLI::App* serve = add("serve", "Serve the labeling API over HTTP");
  serve->add_option("--port", port, "Listen port")->capture_default_str();
  serve->add_option("--host", host, "Listen address")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  std::string stage;
  for (auto* cmd : commands)
    if (cmd->parsed()) stage = cmd->get_name();

  try {
    terrafuse::PipelineConfig cfg = terrafuse::load_config(config_path);
    if (seed) cfg.scene.seed = *seed;
    std::string digest = terrafuse::sha256_hex(terrafuse::read_text(config_path));
    terrafuse::Pipeline pipeline(cfg, digest, out_dir);

    if (stage == "serve") {
      terrafuse::Service service(std::move(pipeline));
      std::cout << "listening on http://" << host << ":" << port << "\n" << std::flush;
      service.listen(host, port);
      return kOk;
    }
    if (stage == "run") {
      for (const auto& name : terrafuse::stage_names()) {
        stage = name;
        pipeline.run(name);
      }
    } else {
      pipeline.run(stage);
    }
  } catch (const terrafuse::Error& e) {
    int code = exit_code_for(e.kind());
    report_failure(stage, terrafuse::to_string(e.kind()), code, e.what());
    return code;
  } catch (const std::exception& e) {
    report_failure(stage, "InternalError", kInternalError, e.what());
    return kInternalError;
  }
  return kOk;
}
