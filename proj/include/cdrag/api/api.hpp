#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cdrag/core/json_io.hpp"
#include "cdrag/cot/pipeline.hpp"
#include "cdrag/error.hpp"
#include "cdrag/metrics/metrics.hpp"
#include "cdrag/perception/perception.hpp"

namespace cdrag::api {

/// Command-line and request overrides layered over a config file.
struct ConfigOverrides {
  std::optional<std::filesystem::path> config_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> frames;
  std::optional<double> tau;
  std::optional<int> k;
  std::optional<int> max_iterations;
};

cot::PipelineConfig resolve_config(const ConfigOverrides& overrides,
                                   const cot::PipelineConfig& base = {});

/// Reads CDRAG_LOG (trace, debug, info, warn, error, off) and routes logs to stderr.
void init_logging();

/// The single reasoning entry point behind `cdrag reason` and
/// POST /sessions/{id}/drag, so both produce the same document.
Json reason(const Scene& scene, const DragInput& drag, const cot::PipelineConfig& cfg,
            const perception::PerceptionBackend* backend, cot::PipelineResult* result = nullptr);

/// Serialization used for every JSON document this layer emits.
std::string format_json(const Json& j);

/// Prediction or ground-truth tracks from a directory: either a dataset root
/// (with index.json) or one `<video_id>.json` per video holding a reasoning
/// result, a bare trajectory list, or `{"trajectories","controlled_id"?}`.
std::vector<metrics::VideoTracks> load_tracks(const std::filesystem::path& dir);

enum class DragFormat { Canonical, Flat };

/// canonical: trajectory list; flat: `[id, x, y]` rows ordered by (frame, id).
/// Accepts a reasoning result or a bare trajectory list.
Json export_drag(const Json& result, DragFormat format);

/// Stats table of a dataset root plus the load issues.
Json dataset_stats(const std::filesystem::path& root);

/// HTTP status class for a library error.
int http_status(ErrorCode code);
Json error_json(ErrorCode code, const std::string& message);

struct ServerOptions {
  std::string backend_spec;  // empty: scene objects are the inventory
  std::size_t capacity = 64;
  cot::PipelineConfig config;
};

/// In-memory session service:
///   POST /sessions                     scene JSON -> {"session_id"}
///   POST /sessions/{id}/drag           drag JSON (+ "config") -> reasoning result
///   GET  /sessions/{id}/trace/{stage}  stage records of the last result
///   GET  /datasets/stats?root=<dir>    dataset stats table
class Server {
 public:
  explicit Server(ServerOptions options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and serves on a background thread; returns the bound port
  /// (pass 0 for an ephemeral one). Throws Error(InvalidArgument) on bind failure.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

  [[nodiscard]] std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cdrag::api
