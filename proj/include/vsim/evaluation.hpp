#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vsim/goal.hpp"
#include "vsim/harness.hpp"
#include "vsim/llm_policy.hpp"

namespace vsim {

enum class FailureCategory {
  exploration_loop,
  phantom_goal,
  coordination_failure,
  state_assumption,
  impossible_sequence,
  object_confusion,
  unclassified,
};

std::string_view to_string(FailureCategory c);
std::optional<FailureCategory> parse_failure_category(std::string_view s);
std::vector<FailureCategory> all_failure_categories();

struct Classification {
  FailureCategory category = FailureCategory::unclassified;
  std::string evidence;
};

// First rule that fires, in this order:
//  exploration_loop     an agent entered some room >= 4 times in a row with
//                       nothing first-sighted between consecutive entries
//  phantom_goal         >= 1 rejection for unknown_object
//  coordination_failure (several agents) >= 2 ticks where two agents aimed at
//                       the same object, or no assigned conjunct was met in
//                       the first half of the budget
//  state_assumption     >= 2 rejections for closed_container, locked,
//                       wrong_key or wrong_code
//  impossible_sequence  >= 1 rejection for not_held, hands_full,
//                       invalid_target or not_affordant
//  object_confusion     an agent handled a non-goal object of a goal
//                       object's category
//  unclassified         otherwise
// Throws TraceIncomplete for successful or inconsistent traces.
Classification classify_failure(const EpisodeTrace& trace, const SceneGraph& final_graph);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 when n < 2
  int n = 0;
};

Stat aggregate(const std::vector<double>& xs);
// "0.97 ± 0.17"
std::string format_stat(const Stat& s, int decimals = 2);

struct TaskDef {
  std::string name;
  std::string generator;  // L1..L4 or a household scenario
  int agents = 1;
  int budget_factor = 4;  // budget = factor x optimal length, unless budget > 0
  int budget = 0;
  std::vector<std::uint64_t> seeds;
};

struct BenchmarkSuite {
  std::vector<TaskDef> tasks;
};

// L1..L4 plus the household tasks (clean_floor, watch_tv, find_object
// single-agent; prepare_food, clean_room two-agent), `seeds` seeds each.
BenchmarkSuite default_suite(int seeds = 20);
// {"schema_version": "1", "tasks": [{"name", "generator", "agents"?,
//  "budget_factor"? | "budget"?, "seeds": [..] | "seed_count": N,
//  "first_seed"?}]}. Throws SchemaError / InvalidConfig.
BenchmarkSuite suite_from_json(const json& doc);
json to_json(const BenchmarkSuite& suite);

struct PolicyChoice {
  std::string name;  // column label: oracle | random | llm
  std::optional<LlmEndpointConfig> llm;
};

// "oracle", "random", or "llm:<config.json>" (reads the file).
PolicyChoice parse_policy_choice(const std::string& text);
std::unique_ptr<Policy> make_policy(const PolicyChoice& choice, std::uint64_t seed);

struct CellResult {
  std::string task;
  std::string policy;
  int successes = 0;
  Stat success;
  Stat steps;  // ticks used
  Stat goal_fraction;
  std::map<std::string, int> failures;  // category -> episodes
  int policy_errors = 0;
  int visibility_violations = 0;
  int observations = 0;
};

struct BenchmarkReport {
  std::vector<std::string> tasks;
  std::vector<std::string> policies;
  std::vector<CellResult> cells;  // task-major
  const CellResult* cell(const std::string& task, const std::string& policy) const;
};

// Every (task, policy, seed) episode, `jobs` at a time; results are reduced
// in (task, policy, seed) order so the report does not depend on `jobs`.
BenchmarkReport run_benchmark(const BenchmarkSuite& suite, const std::vector<PolicyChoice>& policies, int jobs = 1);

// Rows are tasks, columns policies, cells "mean ± std" success rate.
std::string render_table(const BenchmarkReport& report);
json to_json(const BenchmarkReport& report);

}  // namespace vsim
