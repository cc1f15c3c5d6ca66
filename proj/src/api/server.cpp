#include <httplib.h>
#include <spdlog/spdlog.h>

#include <list>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "cdrag/api/api.hpp"
#include "cdrag/error.hpp"

namespace cdrag::api {

namespace {

struct Session {
  std::mutex mu;  // one reasoning run at a time
  Scene scene;
  std::optional<cot::StageTrace> last_trace;
  std::optional<Json> last_result;
};

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(format_json(body), "application/json");
}

void reply_error(httplib::Response& res, const Error& e) {
  reply(res, http_status(e.code()), error_json(e.code(), e.what()));
}

Json parse_body(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                "request body at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

}  // namespace

struct Server::Impl {
  ServerOptions options;
  httplib::Server http;
  std::thread worker;

  mutable std::mutex map_mu;
  std::list<std::string> lru;  // most recent first
  std::unordered_map<std::string, std::pair<std::shared_ptr<Session>, std::list<std::string>::iterator>>
      sessions;
  std::uint64_t next_id = 1;

  explicit Impl(ServerOptions o) : options(std::move(o)) { routes(); }

  std::string add(std::shared_ptr<Session> s) {
    std::lock_guard lock(map_mu);
    const std::string id = "session-" + std::to_string(next_id++);
    lru.push_front(id);
    sessions[id] = {std::move(s), lru.begin()};
    while (sessions.size() > options.capacity) {
      const std::string evicted = lru.back();
      lru.pop_back();
      sessions.erase(evicted);
      spdlog::info("evicted {}", evicted);
    }
    return id;
  }

  std::shared_ptr<Session> get(const std::string& id) {
    std::lock_guard lock(map_mu);
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw Error(ErrorCode::NotFound, "unknown session " + id);
    lru.splice(lru.begin(), lru, it->second.second);
    return it->second.first;
  }

  void guarded(httplib::Response& res, const std::function<void()>& body) {
    try {
      body();
    } catch (const Error& e) {
      reply_error(res, e);
    } catch (const std::exception& e) {
      reply(res, 500, Json{{"error", {{"code", "internal"}, {"message", e.what()}}}});
    }
  }

  void routes() {
    http.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto session = std::make_shared<Session>();
        session->scene = scene_from_json(parse_body(req));
        if (const auto violations = validate_scene(session->scene); !violations.empty()) {
          Json list = Json::array();
          for (const Violation& v : violations) {
            list.push_back(Json{{"object_id", v.object_id}, {"rule", v.rule}, {"message", v.message}});
          }
          Json body = error_json(ErrorCode::InvalidArgument, "scene failed validation");
          body["error"]["violations"] = std::move(list);
          reply(res, 422, body);
          return;
        }
        const std::size_t objects = session->scene.objects.size();
        const std::string id = add(std::move(session));
        reply(res, 201, Json{{"session_id", id}, {"objects", objects}});
      });
    });

    http.Post(R"(/sessions/([^/]+)/drag)", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
      guarded(res, [&] {
        const auto session = get(req.matches[1]);
        const Json body = parse_body(req);
        const DragInput drag = drag_from_json(body);
        cot::PipelineConfig cfg = options.config;
        if (body.is_object() && body.contains("config")) {
          cfg = cot::config_from_json(body["config"], cfg);
        }
        cfg.validate();

        std::lock_guard lock(session->mu);
        std::unique_ptr<perception::PerceptionBackend> backend;
        if (!options.backend_spec.empty()) {
          backend = perception::make_backend(options.backend_spec, session->scene.width,
                                             session->scene.height);
        }
        cot::PipelineResult result;
        const Json out = reason(session->scene, drag, cfg, backend.get(), &result);
        session->last_trace = std::move(result.trace);
        session->last_result = out;
        reply(res, 200, out);
      });
    });

    http.Get(R"(/sessions/([^/]+)/trace/([^/]+))", [this](const httplib::Request& req,
                                                           httplib::Response& res) {
      guarded(res, [&] {
        const auto session = get(req.matches[1]);
        const std::string stage = req.matches[2];
        std::lock_guard lock(session->mu);
        if (!session->last_trace) {
          throw Error(ErrorCode::NotFound, "session has no reasoning result yet");
        }
        Json records = Json::array();
        for (const cot::StageRecord* r : session->last_trace->find(stage)) {
          records.push_back(cot::to_json(*r));
        }
        if (records.empty()) throw Error(ErrorCode::NotFound, "no stage named " + stage);
        reply(res, 200, Json{{"stage", stage}, {"records", records}});
      });
    });

    http.Get("/datasets/stats", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!req.has_param("root")) throw Error(ErrorCode::InvalidArgument, "missing ?root=");
        reply(res, 200, dataset_stats(req.get_param_value("root")));
      });
    });
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() { stop(); }

int Server::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->http.bind_to_any_port(host);
  } else if (!impl_->http.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::InvalidArgument, "cannot bind " + host);
  impl_->worker = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return bound;
}

void Server::listen(const std::string& host, int port) {
  if (!impl_->http.listen(host, port)) {
    throw Error(ErrorCode::InvalidArgument, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

std::size_t Server::session_count() const {
  std::lock_guard lock(impl_->map_mu);
  return impl_->sessions.size();
}

}  // namespace cdrag::api
