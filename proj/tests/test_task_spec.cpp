#include <gtest/gtest.h>

#include "support.hpp"
#include "vsim/household.hpp"
#include "vsim/solver.hpp"
#include "vsim/task_spec.hpp"

using namespace vsim;
using fixtures::error_of;

namespace {

const json kLockKey = json::parse(R"({
  "description": "lock the key in the box",
  "subgoals": [
    {"kind": "object_in", "object_category": "key", "target_category": "box"},
    {"kind": "state_is", "target_category": "box", "state": "locked"}
  ],
  "constraints": [{"order": [0, 1]}]
})");

SceneGraph one_room(bool with_agent) {
  SceneGraph g;
  g.rooms["room_1"] = {"room_1", "Room"};
  if (with_agent) {
    g.agents["agent_1"] = AgentNode{"agent_1", 1, {}, {}};
    g.relations.insert({RelationKind::in_room, "agent_1", "room_1"});
  }
  return g;
}

std::string schema_path(const json& doc) {
  try {
    validate_task_spec(doc);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaError);
    return e.path();
  }
  return "<valid>";
}

}  // namespace

TEST(ValidateTaskSpec, AcceptsLockExample) {
  TaskSpec s = validate_task_spec(kLockKey);
  ASSERT_EQ(s.subgoals.size(), 2u);
  EXPECT_EQ(s.subgoals[0].object_category, "key");
  EXPECT_EQ(s.subgoals[0].target_category, "box");
  EXPECT_EQ(s.subgoals[1].object_category, "box");
  EXPECT_EQ(s.subgoals[1].state, "locked");
  EXPECT_TRUE(s.subgoals[1].value);
  ASSERT_EQ(s.constraints.size(), 1u);
  EXPECT_EQ(s.constraints[0].order, (std::vector<int>{0, 1}));
  EXPECT_EQ(validate_task_spec(to_json(s)), s);
}

TEST(ValidateTaskSpec, Rejections) {
  EXPECT_EQ(schema_path({{"subgoals", json::array()}}), "/subgoals");
  EXPECT_EQ(schema_path({{"subgoals", {{{"kind", "teleport"}, {"object", "x"}}}}}), "/subgoals/0/kind");
  EXPECT_EQ(schema_path({{"subgoals", {{{"kind", "object_in"}, {"object", "x"}}}}}), "/subgoals/0/target");
  EXPECT_EQ(schema_path({{"subgoals", {{{"kind", "door_open"}, {"object", "d"}}}}, {"extra", 1}}), "/extra");
  json bad_index = kLockKey;
  bad_index["constraints"] = {{{"order", {0, 5}}}};
  EXPECT_EQ(schema_path(bad_index), "/constraints/0/order/1");
  json bad_version = kLockKey;
  bad_version["schema_version"] = "2";
  EXPECT_EQ(schema_path(bad_version), "/schema_version");
}

TEST(ValidateTaskSpec, CircularOrderIsCycleError) {
  json doc = kLockKey;
  doc["constraints"] = {{{"order", {0, 1}}}, {{"order", {1, 0}}}};
  EXPECT_EQ(error_of([&] { validate_task_spec(doc); }), ErrorCode::CycleError);
}

TEST(RequiredObjects, LockExample) {
  auto reqs = required_objects(validate_task_spec(kLockKey));
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[0], (ObjectRequirement{"key", 1, {Affordance::graspable}, ""}));
  EXPECT_EQ(reqs[1], (ObjectRequirement{"box", 1, {Affordance::container, Affordance::lockable}, ""}));
}

TEST(RequiredObjects, DoorAndDuplicates) {
  auto door = required_objects(validate_task_spec({{"subgoals", {{{"kind", "door_open"}, {"object_category", "door"}}}}}));
  ASSERT_EQ(door.size(), 1u);
  EXPECT_EQ(door[0], (ObjectRequirement{"door", 1, {Affordance::openable}, ""}));

  json dup = {{"subgoals",
               {{{"kind", "held_by"}, {"object_category", "cup"}}, {{"kind", "held_by"}, {"object_category", "cup"}}}}};
  auto reqs = required_objects(validate_task_spec(dup));
  ASSERT_EQ(reqs.size(), 1u);
  EXPECT_EQ(reqs[0].count, 1);
}

TEST(Instantiate, MintsIntoEmptyRoomAndGoalIsReachable) {
  TaskSpec spec = validate_task_spec(kLockKey);
  Instantiation inst = instantiate(spec, one_room(true), 3);
  ASSERT_NE(inst.graph.object("key_1"), nullptr);
  ASSERT_NE(inst.graph.object("box_1"), nullptr);
  EXPECT_TRUE(check_invariants(inst.graph).empty());
  ASSERT_EQ(inst.goal.conjuncts.size(), 2u);
  EXPECT_EQ(inst.goal.conjuncts[0], (Predicate{PredicateKind::object_in, "key_1", "box_1", "", true}));
  EXPECT_EQ(inst.goal.conjuncts[1], (Predicate{PredicateKind::state_is, "box_1", "", "locked", true}));
  EXPECT_EQ(inst.goal.ordering, (std::vector<std::pair<int, int>>{{0, 1}}));

  SolveResult plan = solve(inst.graph, inst.goal);
  ASSERT_EQ(plan.status, SolveStatus::solved);
  std::vector<Action> actions;
  for (const auto& m : plan.plan) actions.push_back(m.second);
  auto policy = scripted_policy(actions);
  EpisodeConfig cfg;
  cfg.budget = static_cast<int>(actions.size());
  EpisodeResult r = run_episode(inst.graph, inst.goal, {{"agent_1", policy.get()}}, cfg);
  EXPECT_EQ(r.trace.terminal, Terminal::success);
  EXPECT_TRUE(r.trace.goal_report.passed);
}

TEST(Instantiate, ReusesExistingObjects) {
  SceneGraph base = household_base(4, 1);
  json doc = {{"subgoals", {{{"kind", "state_is"}, {"object_category", "tv"}, {"state", "on"}}}}};
  Instantiation inst = instantiate(validate_task_spec(doc), base, 1);
  EXPECT_TRUE(graph_equal(inst.graph, base));
  EXPECT_EQ(inst.graph.revision, base.revision + 1);
  EXPECT_EQ(inst.goal.conjuncts[0].object, "tv_1");
}

TEST(Instantiate, Deterministic) {
  TaskSpec spec = household_task("clean_room");
  SceneGraph base = household_base(8, 2);
  Instantiation a = instantiate(spec, base, 77);
  Instantiation b = instantiate(spec, base, 77);
  EXPECT_EQ(to_json(a.graph).dump(), to_json(b.graph).dump());
  EXPECT_EQ(to_json(a.goal).dump(), to_json(b.goal).dump());
}

TEST(Instantiate, UnknownRoomHint) {
  json doc = {{"subgoals", {{{"kind", "held_by"}, {"object_category", "cup"}, {"room", "attic"}}}}};
  EXPECT_EQ(error_of([&] { instantiate(validate_task_spec(doc), one_room(true), 1); }),
            ErrorCode::InstantiationError);
}

// Distinct categories never share objects, so per-category counts are a
// complete matching check.
TEST(Instantiate, RequirementsAreCovered) {
  for (const auto& name : household_scenarios()) {
    TaskSpec spec = household_task(name);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Instantiation inst = instantiate(spec, household_base(seed, 2), seed);
      for (const auto& req : required_objects(spec)) {
        int matching = 0;
        for (const auto& [id, o] : inst.graph.objects) {
          if (o.category != req.category) continue;
          if (!std::includes(o.affordances.begin(), o.affordances.end(), req.affordances.begin(),
                             req.affordances.end())) {
            continue;
          }
          if (!req.room.empty() && inst.graph.room_of(id) != req.room) continue;
          ++matching;
        }
        EXPECT_GE(matching, req.count) << name << " " << req.category;
      }
    }
  }
}

TEST(Instantiate, AssignAndSpatialConstraints) {
  json doc = {{"subgoals", {{{"kind", "held_by"}, {"object_category", "cup"}}}},
              {"constraints", {{{"spatial", {{"subgoal", 0}, {"room", "kitchen"}}}},
                               {{"assign", {{"subgoal", 0}, {"agent", "agent_2"}}}}}}};
  Instantiation inst = instantiate(validate_task_spec(doc), household_base(1, 2), 1);
  ASSERT_EQ(inst.goal.conjuncts.size(), 2u);
  EXPECT_EQ(inst.goal.conjuncts[1], (Predicate{PredicateKind::object_in, "cup_1", "kitchen", "", true}));
  EXPECT_EQ(inst.goal.assignments.at(0), "agent_2");
  EXPECT_EQ(inst.goal.assignments.at(1), "agent_2");
}
