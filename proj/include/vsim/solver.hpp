#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vsim/action_engine.hpp"
#include "vsim/goal.hpp"
#include "vsim/scene_graph.hpp"

namespace vsim {

enum class SolveStatus { solved, unsolvable, budget_exceeded };

std::string_view to_string(SolveStatus s);

struct SolveOptions {
  std::size_t budget = 200000;  // distinct states
  std::string agent;            // empty: first agent by id
  // When set, only these clue objects may be read (clues the agent already
  // holds in memory still count).
  std::optional<std::set<std::string>> readable_clues;
};

struct SolveResult {
  SolveStatus status = SolveStatus::unsolvable;
  std::vector<Move> plan;
  std::size_t states = 0;
};

// Breadth-first search over canonical states with the knowledge gates:
//  * Unlock by code needs the code derived from read clues.
//  * PickUp of an object some lock names as its key, when the object sits
//    inside a container, needs a lead on that container.
//  * Arrange needs a known colour order and must match it.
// Actions that cannot shorten a plan are pruned: reads of clues that carry no
// referent or payload, Close/Lock/Toggle on objects the goal does not name,
// opening containers with nothing relevant inside, pick-ups of objects that
// are neither keys nor goal objects, and all but one drop location for a
// held object (plus drops onto goal targets).
SolveResult solve(const SceneGraph& graph, const GoalSpec& goal, const SolveOptions& options = {});

// Sorted serialization of relations, object states and clue memory.
std::string canonical_state_key(const SceneGraph& graph);

// Precomputed sets for the gated successor function.
struct SearchContext {
  std::string agent;
  std::set<std::string> goal_objects;
  std::set<std::string> lock_keys;
  std::set<std::string> readable;  // clues the search may read
  std::set<std::string> relevant;
};

SearchContext make_search_context(const SceneGraph& graph, const GoalSpec& goal, const SolveOptions& options);
// legal_actions filtered by the gates and pruning rules above.
std::vector<Action> gated_actions(const SceneGraph& graph, const SearchContext& ctx);

json to_json(const SolveResult& r);

}  // namespace vsim
