#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "vsim/goal.hpp"
#include "vsim/scene_graph.hpp"

namespace httplib {
class Server;
}

namespace vsim {

struct ServiceOptions {
  int ttl_seconds = 3600;        // idle sessions are dropped after this
  int write_delay_ms = 0;        // testing: hold the writer slot this long
  std::size_t max_sessions = 1024;
  std::optional<std::uint64_t> id_seed;  // testing: deterministic session ids
};

// Optional `serve` config file: {"host", "port", "ttl_seconds", "static_dir",
// "snapshot_dir", "llm"}. Unknown keys are a SchemaError.
struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::string snapshot_dir;  // sessions are written here on shutdown
  ServiceOptions service;
  std::optional<json> llm;   // endpoint defaults, kept for clients
};

ServerConfig server_config_from_json(const json& doc);

struct Response {
  int status = 200;
  json body;
};

// Routes (all JSON):
//   GET  /healthz
//   POST /sessions
//   GET  /sessions/{sid}/scene-graph
//   GET  /sessions/{sid}/agents/{aid}/observation
//   POST /sessions/{sid}/actions
//   POST /sessions/{sid}/edits
//   GET  /sessions/{sid}/goal-check
//   POST /sessions/{sid}/recheck-solvable
//   GET  /sessions/{sid}/events
//   DELETE /sessions/{sid}
// POST /sessions takes one source:
//   {"level": 1..4, "seed"?, "room_count"?, "decoy_objects"?, "code_length"?}
//   {"scenario": name, "seed"?, "agents"?}
//   {"task_spec": {...}, "graph"?, "seed"?, "agents"?}  (default base: the house)
//   {"graph": {...}, "goal"?}
// A session admits one writer at a time; a second concurrent write gets 409.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();

  // Route dispatcher shared by the HTTP binding and in-process callers.
  Response handle(const std::string& method, const std::string& path, const std::string& body);

  Response health();
  Response create_session(const json& body);
  Response scene_graph(const std::string& sid);
  Response observation(const std::string& sid, const std::string& agent);
  Response actions(const std::string& sid, const json& body);
  Response edits(const std::string& sid, const json& body);
  Response goal_check(const std::string& sid);
  Response recheck_solvable(const std::string& sid, const json& body);
  Response events(const std::string& sid);
  Response delete_session(const std::string& sid);

  std::size_t session_count();
  // One JSON file per live session, named <sid>.json. Returns the count.
  std::size_t snapshot(const std::string& dir);

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& sid);
  std::string new_id();
  void sweep();

  ServiceOptions options_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t id_state_ = 0;
};

// Installs every route on `server`, forwarding to service.handle.
void bind_routes(httplib::Server& server, Service& service);

// Blocks serving until SIGINT/SIGTERM, then writes snapshots if configured.
// Returns non-zero if the socket cannot be bound.
int serve(Service& service, const ServerConfig& config);

}  // namespace vsim
