#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

#include "cdrag/api/api.hpp"
#include "cdrag/error.hpp"

namespace cdrag::api {

cot::PipelineConfig resolve_config(const ConfigOverrides& o, const cot::PipelineConfig& base) {
  cot::PipelineConfig cfg = base;
  if (o.config_file) cfg = cot::config_from_json(read_json_file(*o.config_file), cfg);
  if (o.seed) cfg.rng_seed = *o.seed;
  if (o.frames) cfg.frame_count = *o.frames;
  if (o.tau) cfg.tau = *o.tau;
  if (o.k) cfg.k = *o.k;
  if (o.max_iterations) cfg.max_iterations = *o.max_iterations;
  cfg.validate();
  return cfg;
}

void init_logging() {
  static bool done = false;
  if (done) return;
  done = true;
  auto logger = spdlog::stderr_color_mt("cdrag");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("CDRAG_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

std::string format_json(const Json& j) { return j.dump(2) + "\n"; }

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
      return 400;
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::InvalidDrag:
    case ErrorCode::DegenerateContact:
    case ErrorCode::InvalidChain:
    case ErrorCode::UndefinedMetric:
      return 422;
    case ErrorCode::BackendUnavailable:
    case ErrorCode::FixtureSchemaInvalid:
      return 502;
  }
  return 500;
}

Json error_json(ErrorCode code, const std::string& message) {
  return Json{{"error", {{"code", to_string(code)}, {"message", message}}}};
}

}  // namespace cdrag::api
