#include "vsim/server.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "httplib.h"
#include "json_util.hpp"
#include "vsim/action_engine.hpp"
#include "vsim/edits.hpp"
#include "vsim/error.hpp"
#include "vsim/escape_room.hpp"
#include "vsim/household.hpp"
#include "vsim/rng.hpp"
#include "vsim/solver.hpp"
#include "vsim/task_spec.hpp"

namespace vsim {

using Clock = std::chrono::steady_clock;

struct Service::Session {
  std::mutex mutex;  // guards everything below
  SceneGraph graph;
  GoalSpec goal;
  std::vector<ConjunctHistory> history;
  int tick = 0;
  int step = 0;
  Clock::time_point last_used = Clock::now();
  std::int64_t created_unix = 0;
  std::vector<json> events;  // applied action batches and edit lists
  std::atomic<bool> writing{false};
};

namespace {

Response error_response(int status, std::string_view code, const std::string& message, const std::string& path = "") {
  json body = {{"error", code}, {"message", message}};
  if (!path.empty()) body["path"] = path;
  return {status, body};
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownId:
    case ErrorCode::UnknownAgent:
    case ErrorCode::UnknownViewpoint:
      return 404;
    case ErrorCode::GenerationFailure:
    case ErrorCode::InstantiationError:
    case ErrorCode::InvariantViolation:
      return 422;
    case ErrorCode::EndpointError:
    case ErrorCode::PolicyError:
      return 502;
    default:
      return 400;
  }
}

Response from_error(const Error& e) { return error_response(status_for(e.code()), to_string(e.code()), e.message(), e.path()); }

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = path.find('/', i);
    if (j == std::string::npos) j = path.size();
    if (j > i) out.push_back(path.substr(i, j - i));
    i = j;
  }
  return out;
}

// Holds the session's single writer slot for the lifetime of the guard.
class WriterSlot {
 public:
  explicit WriterSlot(std::atomic<bool>& flag) : flag_(flag), held_(!flag.exchange(true)) {}
  ~WriterSlot() {
    if (held_) flag_.store(false);
  }
  bool held() const { return held_; }

 private:
  std::atomic<bool>& flag_;
  bool held_;
};

void record_history(const SceneGraph& g, const GoalSpec& goal, std::vector<ConjunctHistory>& history, int tick,
                    int step, const std::string& agent) {
  for (std::size_t i = 0; i < goal.conjuncts.size(); ++i) {
    if (!history[i].tick && predicate_holds(g, goal.conjuncts[i])) history[i] = {tick, step, agent};
  }
}

json goal_summary(const GoalReport& r) {
  json failing = json::array();
  for (std::size_t i = 0; i < r.conjuncts.size(); ++i) {
    if (!r.conjuncts[i].passed) failing.push_back(i);
  }
  return {{"passed", r.passed}, {"satisfied_fraction", r.satisfied_fraction}, {"failing", failing}};
}

std::uint64_t get_seed(const json& body) {
  if (!body.contains("seed")) return 0;
  if (!body.at("seed").is_number_unsigned()) throw schema_error("/seed", "expected non-negative integer");
  return body.at("seed").get<std::uint64_t>();
}

std::int64_t unix_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

}  // namespace

ServerConfig server_config_from_json(const json& doc) {
  detail::check_keys(doc, "", {}, {"host", "port", "ttl_seconds", "static_dir", "snapshot_dir", "llm", "max_sessions"});
  ServerConfig c;
  if (auto v = detail::opt_string(doc, "host", "")) c.host = *v;
  if (doc.contains("port")) c.port = detail::get_int(doc, "port", "");
  if (doc.contains("ttl_seconds")) c.service.ttl_seconds = detail::get_int(doc, "ttl_seconds", "");
  if (doc.contains("max_sessions")) c.service.max_sessions = static_cast<std::size_t>(detail::get_int(doc, "max_sessions", ""));
  if (auto v = detail::opt_string(doc, "static_dir", "")) c.static_dir = *v;
  if (auto v = detail::opt_string(doc, "snapshot_dir", "")) c.snapshot_dir = *v;
  if (doc.contains("llm")) c.llm = doc.at("llm");
  if (c.port < 0 || c.port > 65535) throw Error(ErrorCode::InvalidConfig, "port out of range", "/port");
  if (c.service.ttl_seconds < 1) throw Error(ErrorCode::InvalidConfig, "ttl_seconds must be >= 1", "/ttl_seconds");
  return c;
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.id_seed) id_state_ = *options_.id_seed;
}

Service::~Service() = default;

std::string Service::new_id() {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  if (options_.id_seed) {
    SplitMix64 rng(id_state_);
    hi = rng.next();
    lo = rng.next();
    id_state_ = rng.state();
  } else {
    std::random_device rd;
    hi = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    lo = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  }
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buf;
}

void Service::sweep() {
  const auto now = Clock::now();
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second->last_used > std::chrono::seconds(options_.ttl_seconds)) {
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::shared_ptr<Service::Session> Service::find(const std::string& sid) {
  std::lock_guard lock(mutex_);
  sweep();
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownId, "unknown session '" + sid + "'");
  it->second->last_used = Clock::now();
  return it->second;
}

std::size_t Service::session_count() {
  std::lock_guard lock(mutex_);
  sweep();
  return sessions_.size();
}

Response Service::health() { return {200, {{"status", "ok"}}}; }

Response Service::create_session(const json& body) {
  if (!body.is_object()) throw schema_error("", "expected object");
  int sources = 0;
  for (const char* k : {"level", "scenario", "task_spec"}) sources += body.contains(k);
  if (sources > 1 || (sources == 0 && !body.contains("graph"))) {
    throw schema_error("", "give exactly one of level, scenario, task_spec, graph");
  }
  auto s = std::make_shared<Session>();
  if (body.contains("level")) {
    GeneratedRoom room = generate(level_config_from_json(body, ""));
    s->graph = std::move(room.graph);
    s->goal = std::move(room.goal);
  } else if (body.contains("scenario")) {
    detail::check_keys(body, "", {"scenario"}, {"seed", "agents"});
    const int agents = body.contains("agents") ? detail::get_int(body, "agents", "") : 1;
    Scenario sc = household_scenario(detail::get_string(body, "scenario", ""), get_seed(body), agents);
    s->graph = std::move(sc.graph);
    s->goal = std::move(sc.goal);
  } else if (body.contains("task_spec")) {
    detail::check_keys(body, "", {"task_spec"}, {"graph", "seed", "agents"});
    const std::uint64_t seed = get_seed(body);
    TaskSpec spec = validate_task_spec(body.at("task_spec"));
    SceneGraph base;
    if (body.contains("graph")) {
      if (body.contains("agents")) throw schema_error("/agents", "agents only applies to the default house");
      base = scene_graph_from_json(body.at("graph"));
    } else {
      const int agents = body.contains("agents") ? detail::get_int(body, "agents", "") : 1;
      if (agents < 1 || agents > 8) throw schema_error("/agents", "expected 1..8");
      base = household_base(seed, agents);
    }
    Instantiation inst = instantiate(spec, base, seed);
    s->graph = std::move(inst.graph);
    s->goal = std::move(inst.goal);
  } else {
    detail::check_keys(body, "", {"graph"}, {"goal"});
    s->graph = scene_graph_from_json(body.at("graph"));
    auto violations = check_invariants(s->graph);
    if (!violations.empty()) {
      throw Error(ErrorCode::InvariantViolation, violations.front().kind + ": " + violations.front().detail, "/graph");
    }
    if (body.contains("goal")) {
      s->goal = goal_from_json(body.at("goal"), "/goal");
      check_goal_ordering(s->goal, "/goal/ordering");
    }
  }
  const bool has_goal = !s->goal.conjuncts.empty();
  s->history.assign(s->goal.conjuncts.size(), {});
  record_history(s->graph, s->goal, s->history, 0, 0, "");
  s->created_unix = unix_now();

  json agent_ids = json::array();
  for (const auto& [aid, a] : s->graph.agents) {
    (void)a;
    agent_ids.push_back(aid);
  }
  std::string sid;
  {
    std::lock_guard lock(mutex_);
    sweep();
    if (sessions_.size() >= options_.max_sessions) {
      return error_response(503, "SessionLimit", "too many live sessions");
    }
    sid = new_id();
    sessions_[sid] = s;
  }
  return {201,
          {{"session_id", sid},
           {"revision", s->graph.revision},
           {"agents", agent_ids},
           {"graph", to_json(s->graph)},
           {"goal", has_goal ? to_json(s->goal) : json(nullptr)},
           {"ttl_seconds", options_.ttl_seconds}}};
}

Response Service::scene_graph(const std::string& sid) {
  auto s = find(sid);
  std::lock_guard lock(s->mutex);
  return {200, {{"revision", s->graph.revision}, {"tick", s->tick}, {"graph", to_json(s->graph)}}};
}

Response Service::observation(const std::string& sid, const std::string& agent) {
  auto s = find(sid);
  std::lock_guard lock(s->mutex);
  Observation obs = observe(s->graph, agent);
  json legal = json::array();
  for (const auto& a : legal_actions(s->graph, agent)) legal.push_back(to_json(a));
  return {200, {{"revision", s->graph.revision}, {"observation", to_json(obs)}, {"legal_actions", legal}}};
}

Response Service::actions(const std::string& sid, const json& body) {
  auto s = find(sid);
  WriterSlot slot(s->writing);
  if (!slot.held()) return error_response(409, "Conflict", "another write to this session is in progress");
  detail::check_keys(body, "", {}, {"moves", "agent", "action"});
  std::vector<Move> moves;
  if (body.contains("moves")) {
    if (body.contains("agent") || body.contains("action")) throw schema_error("", "give moves or agent/action");
    const json& arr = detail::get_array(body, "moves", "");
    for (std::size_t i = 0; i < arr.size(); ++i) moves.push_back(move_from_json(arr[i], "/moves/" + std::to_string(i)));
  } else {
    moves.push_back(move_from_json(body, ""));
  }
  if (options_.write_delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(options_.write_delay_ms));

  std::lock_guard lock(s->mutex);
  // Agents are checked before any move lands.
  std::set<std::string> agents;
  for (const auto& [aid, a] : moves) {
    (void)a;
    if (!s->graph.agent(aid)) throw Error(ErrorCode::UnknownAgent, "unknown agent '" + aid + "'");
    if (!agents.insert(aid).second) throw Error(ErrorCode::DuplicateAgent, "agent '" + aid + "' moves twice");
  }
  ++s->tick;
  json outcomes = json::array();
  json applied = json::array();
  for (const auto& [aid, a] : moves) {
    Outcome o = apply_in_place(s->graph, aid, a);
    ++s->step;
    record_history(s->graph, s->goal, s->history, s->tick, s->step, aid);
    outcomes.push_back({{"agent", aid}, {"outcome", to_json(o)}});
    applied.push_back({{"agent", aid}, {"action", to_json(a)}, {"status", o.ok ? "ok" : "rejected"}});
  }
  s->events.push_back({{"kind", "actions"}, {"tick", s->tick}, {"revision", s->graph.revision}, {"moves", applied}});
  return {200,
          {{"revision", s->graph.revision},
           {"tick", s->tick},
           {"outcomes", outcomes},
           {"goal", goal_summary(vsim::goal_check(s->graph, s->goal, s->history))}}};
}

Response Service::edits(const std::string& sid, const json& body) {
  auto s = find(sid);
  WriterSlot slot(s->writing);
  if (!slot.held()) return error_response(409, "Conflict", "another write to this session is in progress");
  EditList list = edit_list_from_json(body);
  std::optional<std::string> viewpoint;
  if (body.is_object()) viewpoint = detail::opt_string(body, "viewpoint", "");
  if (options_.write_delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(options_.write_delay_ms));

  std::lock_guard lock(s->mutex);
  if (!viewpoint) {
    if (!s->graph.agents.empty()) viewpoint = s->graph.agents.begin()->first;
    else if (!s->graph.rooms.empty()) viewpoint = s->graph.rooms.begin()->first;
  }
  if (!viewpoint || (!s->graph.agent(*viewpoint) && !s->graph.is_room(*viewpoint))) {
    throw Error(ErrorCode::UnknownViewpoint, "unknown viewpoint '" + viewpoint.value_or("") + "'", "/viewpoint");
  }
  EditResult result = apply_edits(s->graph, list);
  bool any = false;
  json verdicts = json::array();
  for (const auto& v : result.verdicts) {
    any = any || v.applied;
    verdicts.push_back(to_json(v));
  }
  if (any) s->graph = std::move(result.graph);
  CheckReport check = interpretation_check(s->graph, list, *viewpoint, result.verdicts);
  s->events.push_back({{"kind", "edits"},
                       {"tick", s->tick},
                       {"revision", s->graph.revision},
                       {"edits", to_json(list).at("edits")},
                       {"passed", check.passed}});
  return {200, {{"revision", s->graph.revision}, {"viewpoint", *viewpoint}, {"verdicts", verdicts}, {"check", to_json(check)}}};
}

Response Service::goal_check(const std::string& sid) {
  auto s = find(sid);
  std::lock_guard lock(s->mutex);
  GoalReport report = vsim::goal_check(s->graph, s->goal, s->history);
  json history = json::array();
  for (const auto& h : s->history) history.push_back(to_json(h));
  return {200,
          {{"revision", s->graph.revision}, {"goal", to_json(s->goal)}, {"report", to_json(report)}, {"history", history}}};
}

Response Service::recheck_solvable(const std::string& sid, const json& body) {
  auto s = find(sid);
  SolveOptions opt;
  if (!body.is_null()) {
    detail::check_keys(body, "", {}, {"budget", "agent"});
    if (body.contains("budget")) {
      const int b = detail::get_int(body, "budget", "");
      if (b < 1) throw schema_error("/budget", "expected positive integer");
      opt.budget = static_cast<std::size_t>(b);
    }
    if (auto a = detail::opt_string(body, "agent", "")) opt.agent = *a;
  }
  SceneGraph snapshot;
  GoalSpec goal;
  {
    std::lock_guard lock(s->mutex);
    snapshot = s->graph;
    goal = s->goal;
  }
  if (!opt.agent.empty() && !snapshot.agent(opt.agent)) throw Error(ErrorCode::UnknownAgent, "unknown agent '" + opt.agent + "'");
  json out = to_json(solve(snapshot, goal, opt));
  out["revision"] = snapshot.revision;
  return {200, out};
}

Response Service::events(const std::string& sid) {
  auto s = find(sid);
  std::lock_guard lock(s->mutex);
  return {200, {{"revision", s->graph.revision}, {"events", s->events}}};
}

std::size_t Service::snapshot(const std::string& dir) {
  std::vector<std::pair<std::string, std::shared_ptr<Session>>> live;
  {
    std::lock_guard lock(mutex_);
    sweep();
    live.assign(sessions_.begin(), sessions_.end());
  }
  std::filesystem::create_directories(dir);
  for (const auto& [sid, s] : live) {
    json history = json::array();
    std::lock_guard lock(s->mutex);
    for (const auto& h : s->history) history.push_back(to_json(h));
    json doc = {{"schema_version", "1"},
                {"session_id", sid},
                {"created_unix", s->created_unix},
                {"tick", s->tick},
                {"graph", to_json(s->graph)},
                {"goal", to_json(s->goal)},
                {"history", history},
                {"events", s->events}};
    std::ofstream out(std::filesystem::path(dir) / (sid + ".json"));
    if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write snapshot into " + dir);
    out << doc.dump(2) << "\n";
  }
  return live.size();
}

Response Service::delete_session(const std::string& sid) {
  std::lock_guard lock(mutex_);
  if (!sessions_.erase(sid)) throw Error(ErrorCode::UnknownId, "unknown session '" + sid + "'");
  return {200, {{"deleted", sid}}};
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body_text) {
  try {
    json body;
    if (!body_text.empty()) {
      try {
        body = json::parse(body_text);
      } catch (const json::parse_error& e) {
        return error_response(400, "SchemaError", std::string("body is not JSON: ") + e.what());
      }
    }
    const auto parts = split_path(path);
    const auto n = parts.size();
    auto is = [&](const char* m) { return method == m; };
    auto not_allowed = [&]() { return error_response(405, "MethodNotAllowed", method + " not allowed on " + path); };

    if (n == 1 && parts[0] == "healthz") return is("GET") ? health() : not_allowed();
    if (n >= 1 && parts[0] == "sessions") {
      if (n == 1) return is("POST") ? create_session(body.is_null() ? json::object() : body) : not_allowed();
      const std::string& sid = parts[1];
      if (n == 2) return is("DELETE") ? delete_session(sid) : not_allowed();
      const std::string& leaf = parts[2];
      if (n == 3 && leaf == "scene-graph") return is("GET") ? scene_graph(sid) : not_allowed();
      if (n == 3 && leaf == "actions") return is("POST") ? actions(sid, body) : not_allowed();
      if (n == 3 && leaf == "edits") return is("POST") ? edits(sid, body) : not_allowed();
      if (n == 3 && leaf == "goal-check") return is("GET") ? goal_check(sid) : not_allowed();
      if (n == 3 && leaf == "recheck-solvable") return is("POST") ? recheck_solvable(sid, body) : not_allowed();
      if (n == 3 && leaf == "events") return is("GET") ? events(sid) : not_allowed();
      if (n == 5 && leaf == "agents" && parts[4] == "observation") {
        return is("GET") ? observation(sid, parts[3]) : not_allowed();
      }
    }
    return error_response(404, "NotFound", "no route for " + path);
  } catch (const Error& e) {
    return from_error(e);
  } catch (const json::exception& e) {
    return error_response(400, "SchemaError", e.what());
  }
}

void bind_routes(httplib::Server& server, Service& service) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    Response r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Delete(".*", forward);
  server.Put(".*", forward);
  server.Patch(".*", forward);
}

namespace {
httplib::Server* g_running = nullptr;

void on_signal(int) {
  if (g_running) g_running->stop();
}
}  // namespace

int serve(Service& service, const ServerConfig& config) {
  httplib::Server server;
  if (!config.static_dir.empty() && !server.set_mount_point("/", config.static_dir)) {
    throw Error(ErrorCode::InvalidConfig, "static directory not found: " + config.static_dir);
  }
  bind_routes(server, service);
  g_running = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const bool ok = server.listen(config.host, config.port);
  g_running = nullptr;
  if (!config.snapshot_dir.empty()) service.snapshot(config.snapshot_dir);
  return ok ? 0 : 1;
}

}  // namespace vsim
