#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vsim/goal.hpp"
#include "vsim/scene_graph.hpp"

namespace vsim {

// One subgoal as an external interpreter emits it. Entities are named either
// by id or by category; single-entity kinds (state_is, door_open,
// clue_solved, held_by) name their focus through object / object_category,
// with target / target_category accepted as a synonym.
struct SubGoal {
  PredicateKind kind = PredicateKind::object_in;
  std::string object;
  std::string object_category;
  std::string target;
  std::string target_category;
  std::string state;
  bool value = true;
  int count = 1;     // instances of object_category
  std::string room;  // placement hint for minted focus objects

  bool operator==(const SubGoal&) const = default;
};

struct Constraint {
  enum class Kind { order, assign, spatial };
  Kind kind = Kind::order;
  std::vector<int> order;  // subgoal indices, each before the next
  int subgoal = 0;
  std::string agent;
  std::string room;

  bool operator==(const Constraint&) const = default;
};

struct TaskSpec {
  std::string schema_version = "1";
  std::string description;
  std::vector<SubGoal> subgoals;
  std::vector<Constraint> constraints;

  bool operator==(const TaskSpec&) const = default;
};

// Throws SchemaError (with path) or CycleError.
TaskSpec validate_task_spec(const json& doc);
json to_json(const TaskSpec& spec);

struct ObjectRequirement {
  std::string category;
  int count = 1;
  std::set<Affordance> affordances;
  std::string room;  // empty: anywhere

  bool operator==(const ObjectRequirement&) const = default;
};

// One entry per category in first-mention order; affordances are the union
// of what every mention needs, count the largest single demand.
std::vector<ObjectRequirement> required_objects(const TaskSpec& spec);
json to_json(const ObjectRequirement& r);

struct Instantiation {
  SceneGraph graph;
  GoalSpec goal;
};

// Reuses matching objects (lowest ids first) before minting new ones.
// Throws InstantiationError.
Instantiation instantiate(const TaskSpec& spec, const SceneGraph& base, std::uint64_t seed);

}  // namespace vsim
