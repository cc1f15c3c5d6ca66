// cdrag: multi-object trajectory reasoning from a drag, plus evaluation and
// dataset tools. Exit codes: 0 ok, 1 input error, 3 reasoning not validated.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>

#include "cdrag/api/api.hpp"
#include "cdrag/error.hpp"

namespace {

using namespace cdrag;

constexpr int kInputError = 1;
constexpr int kUnvalidated = 3;

struct PipelineFlags {
  api::ConfigOverrides overrides;
  std::string config_file;
  std::string backend;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--config", f.config_file, "JSON pipeline config (k, max_iterations, tau, ...)");
  cmd->add_option("--seed", f.overrides.seed, "Seed for candidate multipliers beyond the fifth");
  cmd->add_option("--frames", f.overrides.frames, "Frames per output trajectory (default 14)");
  cmd->add_option("--tau", f.overrides.tau, "Backward validation tolerance in px (default 2.0)");
  cmd->add_option("--k", f.overrides.k, "Candidates per iteration (default 5)");
  cmd->add_option("--max-iter", f.overrides.max_iterations, "Reasoning iterations (default 3)");
  cmd->add_option("--backend", f.backend,
                  "Perception backend: fixture:<path> or remote:<url>; default uses scene objects");
}

cot::PipelineConfig config_of(PipelineFlags& f) {
  if (!f.config_file.empty()) f.overrides.config_file = f.config_file;
  return api::resolve_config(f.overrides);
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

api::Server* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  api::init_logging();
  CLI::App app{"cdrag: infer trajectories of every object from one drag"};
  app.require_subcommand(1);
  app.footer("Environment: CDRAG_LOG=trace|debug|info|warn|error|off (logs go to stderr)");

  std::string scene_file;
  std::string drag_file;
  std::string output;
  PipelineFlags reason_flags;
  auto* reason = app.add_subcommand("reason", "Run the five-stage reasoning on a scene and drag");
  reason->add_option("scene", scene_file, "Scene JSON")->required();
  reason->add_option("drag", drag_file, "Drag JSON")->required();
  reason->add_option("-o,--output", output, "Write the result here instead of stdout");
  add_pipeline_flags(reason, reason_flags);

  std::string pred_dir;
  std::string gt_dir;
  std::string match = "auto";
  auto* evaluate = app.add_subcommand("evaluate", "MOC / ObjMC between prediction and truth");
  evaluate->add_option("pred", pred_dir, "Directory of <video_id>.json predictions")->required();
  evaluate->add_option("gt", gt_dir, "Ground-truth directory or dataset root")->required();
  evaluate->add_option("--match", match, "Track matching: id, spatial or auto")
      ->check(CLI::IsMember({"id", "spatial", "auto"}));

  std::string result_file;
  std::string format = "canonical";
  auto* export_drag =
      app.add_subcommand("export-drag", "Convert a result into a drag condition file");
  export_drag->add_option("result", result_file, "Result JSON from `reason`")->required();
  export_drag->add_option("--format", format, "canonical or flat")
      ->check(CLI::IsMember({"canonical", "flat"}));
  export_drag->add_option("-o,--output", output, "Write here instead of stdout");

  std::string root;
  auto* stats = app.add_subcommand("stats", "Per-category counts of a dataset root");
  stats->add_option("root", root, "Dataset root holding index.json")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t capacity = 64;
  PipelineFlags serve_flags;
  auto* serve = app.add_subcommand("serve", "HTTP session API");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");
  serve->add_option("--capacity", capacity, "Sessions kept in memory (LRU)");
  add_pipeline_flags(serve, serve_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*reason) {
      const cot::PipelineConfig cfg = config_of(reason_flags);
      const Scene scene = scene_from_json(read_json_file(scene_file));
      const DragInput drag = drag_from_json(read_json_file(drag_file));
      std::unique_ptr<perception::PerceptionBackend> backend;
      if (!reason_flags.backend.empty()) {
        backend = perception::make_backend(reason_flags.backend, scene.width, scene.height);
      }
      cot::PipelineResult result;
      const Json out = api::reason(scene, drag, cfg, backend.get(), &result);
      write_out(output, api::format_json(out));
      return result.report.passed ? 0 : kUnvalidated;
    }
    if (*evaluate) {
      const auto mode = match == "id"        ? metrics::MatchMode::Id
                        : match == "spatial" ? metrics::MatchMode::Spatial
                                             : metrics::MatchMode::Auto;
      const auto pred = api::load_tracks(pred_dir);
      const auto gt = api::load_tracks(gt_dir);
      std::cout << api::format_json(metrics::evaluate(pred, gt, mode));
      return 0;
    }
    if (*export_drag) {
      const auto fmt = format == "flat" ? api::DragFormat::Flat : api::DragFormat::Canonical;
      write_out(output, api::format_json(api::export_drag(read_json_file(result_file), fmt)));
      return 0;
    }
    if (*stats) {
      std::cout << api::format_json(api::dataset_stats(root));
      return 0;
    }
    if (*serve) {
      api::ServerOptions options;
      options.backend_spec = serve_flags.backend;
      options.capacity = capacity;
      options.config = config_of(serve_flags);
      api::Server server(options);
      g_server = &server;
      std::signal(SIGINT, [](int) {
        if (g_server != nullptr) g_server->stop();
      });
      spdlog::warn("listening on {}:{}", host, port);
      server.listen(host, port);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "cdrag: " << to_string(e.code()) << ": " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "cdrag: " << e.what() << '\n';
    return kInputError;
  }
  return 0;
}
