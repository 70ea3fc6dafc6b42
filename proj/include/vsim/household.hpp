#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vsim/goal.hpp"
#include "vsim/scene_graph.hpp"
#include "vsim/task_spec.hpp"

namespace vsim {

// Three-room house (living_room, kitchen, bedroom) with furniture and
// appliances. Agents agent_1..agent_N start in rooms drawn from `seed`
// (agent_1 always in living_room).
SceneGraph household_base(std::uint64_t seed, int agents = 1);

std::vector<std::string> household_scenarios();  // clean_floor, watch_tv, ...

// The scenario's task specification. Throws InvalidConfig on unknown names.
TaskSpec household_task(const std::string& name);

struct Scenario {
  std::string id;
  SceneGraph graph;
  GoalSpec goal;
  int optimal_length = 0;  // agent_1 alone, from the solver
};

// Instantiates the scenario on a fresh house with `agents` agents (1 or 2).
// With two agents prepare_food assigns the apple to agent_1 and the stove to
// agent_2. Throws GenerationFailure if the solver cannot find a plan.
Scenario household_scenario(const std::string& name, std::uint64_t seed, int agents = 1);

// Two-conjunct task for two agents: carry a utensil to the sink and switch
// an appliance on, the two foci in different rooms. `agents` is 1 or 2; the
// scene is otherwise identical for a given seed.
Scenario two_part_task(std::uint64_t seed, int agents);

}  // namespace vsim
