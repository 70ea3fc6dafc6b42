// Shared fixtures for the unit tests and the acceptance runner.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "vsim/edits.hpp"
#include "vsim/error.hpp"
#include "vsim/evaluation.hpp"
#include "vsim/harness.hpp"
#include "vsim/rng.hpp"
#include "vsim/scene_graph.hpp"
#include "vsim/server.hpp"

namespace vsim::fixtures {

ObjectNode make_object(const std::string& id, const std::string& category, std::set<Affordance> affordances,
                       std::map<std::string, bool> states = {});

// room_1 and room_2 joined by open door_1. room_1: box_1 (closed container),
// table_1 (surface), key_1, key_2, lamp_1, lamp_2. room_2: ball_1.
// Agents agent_1 (and agent_2 when `agents` == 2) in room_1.
SceneGraph two_room_house(int agents = 1);

Step make_step(int tick, const std::string& agent, const std::string& room, Action action,
               std::optional<PreconditionCode> rejected = std::nullopt, std::vector<std::string> first_seen = {});

struct FixtureTrace {
  std::string name;
  EpisodeTrace trace;
  SceneGraph final_graph;
};

// Several hand-built failing traces per category, keyed by the category they
// must be classified as.
std::vector<std::pair<FailureCategory, std::vector<FixtureTrace>>> classifier_fixtures();

// Random edits that apply cleanly to `graph`, applied in order; returns the
// batch and the resulting graph.
struct Mutation {
  EditList edits;
  SceneGraph after;
};
Mutation random_mutation(const SceneGraph& graph, SplitMix64& rng, int count);

// A base graph for mutation tests: generated rooms and houses, by index.
SceneGraph mutation_base(int index);

// Breaks the effect of `e` in `graph` in one place.
SceneGraph tamper(const SceneGraph& graph, const Edit& e);

// `service` behind HTTP on 127.0.0.1, ephemeral port, until destroyed.
class LiveServer {
 public:
  explicit LiveServer(Service& service);
  ~LiveServer();
  int port() const { return port_; }

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

// One request of the endpoint walk shared by the server tests and the
// acceptance runner. "{sid}" in `path` stands for the session created by the
// first successful POST /sessions.
struct ServerCall {
  std::string method;
  std::string path;
  std::string body;
};

// Touches every route, with success and error statuses.
std::vector<ServerCall> endpoint_script();
std::string with_sid(std::string path, const std::string& sid);
// Sends `call` to 127.0.0.1:port; status -1 on transport failure.
std::pair<int, std::string> wire_call(int port, const ServerCall& call, const std::string& path);

// Code of the vsim::Error `f` throws, nullopt if it returns.
std::optional<ErrorCode> error_of(const std::function<void()>& f);

}  // namespace vsim::fixtures
