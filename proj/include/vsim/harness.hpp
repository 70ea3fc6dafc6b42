#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vsim/action_engine.hpp"
#include "vsim/goal.hpp"
#include "vsim/scene_graph.hpp"

namespace vsim {

// Everything a policy sees when deciding. `goal` carries the allocation in
// its assignments; `legal` is the agent's legal-action menu.
struct PolicyContext {
  const Observation& obs;
  const GoalSpec& goal;
  const std::vector<Action>& legal;
  int tick = 0;
};

struct PolicyMemory {
  bool initialized = false;
  std::uint64_t rng_state = 0;  // seeded by the harness from the episode seed
  std::map<std::string, int> visits;
  // Believed world for planning policies; rebuilt from observations.
  SceneGraph belief;
  std::vector<Action> pending;
  std::size_t cursor = 0;  // scripted policies
  // (key, lock) pairs a rejected unlock has ruled out.
  std::set<std::pair<std::string, std::string>> discredited;
  // Container a key was first seen inside.
  std::map<std::string, std::string> key_origin;
  std::uint64_t belief_digest = 0;
  std::vector<json> transcript;
  std::vector<std::string> log;
  std::optional<Action> last_action;
  std::optional<Outcome> last_outcome;
};

json to_json(const PolicyMemory& m);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Throws PolicyError when it cannot produce an action.
  virtual Action decide(const PolicyContext& ctx, PolicyMemory& memory) = 0;
};

// Plans on a belief graph built from observations; replans on rejection or
// belief change and explores (fewest-visited room first) when stuck. Pursues
// the conjuncts assigned to its agent, or all when none are assigned.
std::unique_ptr<Policy> oracle_policy(std::uint64_t seed = 0);
// Uniform over the legal menu.
std::unique_ptr<Policy> random_policy(std::uint64_t seed = 0);
std::unique_ptr<Policy> scripted_policy(std::vector<Action> plan);

enum class Terminal { success, budget_exhausted, policy_error };
std::string_view to_string(Terminal t);

struct Step {
  int tick = 0;
  std::string agent;
  std::string room;                     // where the agent stood when deciding
  std::vector<std::string> first_seen;  // ids this agent saw for the first time
  std::string observation_digest;       // FNV-1a 64 of the observation JSON, hex
  Action action;
  Outcome outcome;
};

struct EpisodeTrace {
  std::string task_id;
  GoalSpec goal;
  std::uint64_t seed = 0;
  std::vector<std::string> agents;
  std::map<int, std::string> allocation;
  int budget = 0;
  std::vector<Step> steps;
  Terminal terminal = Terminal::budget_exhausted;
  int ticks = 0;
  GoalReport goal_report;
  std::vector<ConjunctHistory> history;
  std::string policy_error;
  int visibility_violations = 0;
  int observations = 0;
  double duration_seconds = 0.0;
};

// Canonical form omits wall-clock duration so equal runs serialize equally.
json to_json(const EpisodeTrace& trace, bool include_duration = false);
EpisodeTrace trace_from_json(const json& doc);

struct EpisodeConfig {
  int budget = 50;  // ticks, >= 1
  std::uint64_t seed = 0;
  std::string task_id;
  // Conjunct -> agent, shown to policies as goal assignments. The goal check
  // still uses the goal's own assignments.
  std::map<int, std::string> allocation;
};

struct EpisodeResult {
  EpisodeTrace trace;
  SceneGraph final_graph;
};

// Policies are keyed by agent id and must cover every agent in `room`.
// Throws InvalidConfig.
EpisodeResult run_episode(const SceneGraph& room, const GoalSpec& goal, const std::map<std::string, Policy*>& policies,
                          const EpisodeConfig& config);

// Greedy balanced assignment. A conjunct's estimated cost for an agent is
// 1 + room hops from the agent to the conjunct's focus object. Each
// unassigned conjunct, in index order, goes to the agent with the smallest
// load + cost (ties by agent id), whose load then grows by that cost.
// Existing goal.assignments are kept and counted as load.
std::map<int, std::string> allocate_subgoals(const GoalSpec& goal, const std::vector<std::string>& agents,
                                             const SceneGraph& graph);

// Room-to-room hops through doors, ignoring door state. -1 if unreachable.
int room_distance(const SceneGraph& graph, const std::string& from, const std::string& to);

}  // namespace vsim
