#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vsim/scene_graph.hpp"

namespace vsim {

enum class PredicateKind { object_in, object_on, state_is, door_open, clue_solved, held_by };

std::string_view to_string(PredicateKind k);
std::optional<PredicateKind> parse_predicate_kind(std::string_view s);

// object_in(object, target)  target is a container, or a room (hoisted, not held)
// object_on(object, target)
// state_is(object, state, value)
// door_open(object)
// clue_solved(object)        some agent has read the clue object
// held_by(object, target)    target empty means any agent
struct Predicate {
  PredicateKind kind = PredicateKind::door_open;
  std::string object;
  std::string target;
  std::string state;
  bool value = true;

  bool operator==(const Predicate&) const = default;
};

struct GoalSpec {
  std::vector<Predicate> conjuncts;
  std::vector<std::pair<int, int>> ordering;  // (before, after)
  std::map<int, std::string> assignments;     // conjunct -> agent
  std::string description;

  bool operator==(const GoalSpec&) const = default;
};

bool predicate_holds(const SceneGraph& graph, const Predicate& p);
// State predicates only; ordering and assignments are ignored.
bool goal_holds(const SceneGraph& graph, const GoalSpec& goal);

// When a conjunct first became true, and which agent's action made it so.
// `step` is a global move counter used to order conjuncts satisfied within
// the same tick.
struct ConjunctHistory {
  std::optional<int> tick;
  std::optional<int> step;
  std::string agent;

  bool operator==(const ConjunctHistory&) const = default;
};

struct ConjunctResult {
  bool holds = false;
  bool ordering_ok = true;
  bool assignment_ok = true;
  bool passed = false;
  std::string detail;
};

struct GoalReport {
  bool passed = false;
  std::vector<ConjunctResult> conjuncts;
  double satisfied_fraction = 0.0;
};

// `history` is indexed like goal.conjuncts; an empty vector means "no
// history", in which case ordered or assigned conjuncts fail.
GoalReport goal_check(const SceneGraph& graph, const GoalSpec& goal, const std::vector<ConjunctHistory>& history);

json to_json(const Predicate& p);
Predicate predicate_from_json(const json& doc, const std::string& path);
json to_json(const GoalSpec& goal);
GoalSpec goal_from_json(const json& doc, const std::string& path = "");
json to_json(const GoalReport& report);
json to_json(const ConjunctHistory& h);

// Throws CycleError when the ordering has a cycle, SchemaError on indices out
// of range.
void check_goal_ordering(const GoalSpec& goal, const std::string& path);

}  // namespace vsim
