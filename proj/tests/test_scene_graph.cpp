#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"
#include "vsim/error.hpp"
#include "vsim/escape_room.hpp"

using namespace vsim;
using vsim::fixtures::make_object;

namespace {

// One room, agent_1, open box_1 on the floor.
SceneGraph tiny_room() {
  SceneGraph g;
  g.rooms["room_1"] = {"room_1", "Room"};
  g.objects["box_1"] = make_object("box_1", "box", {Affordance::openable, Affordance::container}, {{"open", false}});
  g.relations.insert({RelationKind::in_room, "box_1", "room_1"});
  g.agents["agent_1"] = AgentNode{"agent_1", 1, {}, {}};
  g.relations.insert({RelationKind::in_room, "agent_1", "room_1"});
  return g;
}

ObjectNode key(const std::string& id) { return make_object(id, "key", {Affordance::graspable, Affordance::movable}); }

bool has_kind(const std::vector<Violation>& vs, const std::string& kind) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.kind == kind; });
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST(AddNode, KeyHiddenInBox) {
  SceneGraph g = add_node(tiny_room(), key("key_1"), Relation{RelationKind::inside, "key_1", "box_1"});
  ASSERT_TRUE(g.object("key_1"));
  EXPECT_EQ(g.parent_of("key_1"), (Relation{RelationKind::inside, "key_1", "box_1"}));
  EXPECT_TRUE(check_invariants(g).empty());
  Observation obs = observe(g, "agent_1");
  EXPECT_TRUE(obs.find("box_1"));
  EXPECT_FALSE(obs.find("key_1"));
}

TEST(AddNode, DuplicateId) {
  SceneGraph g = add_node(tiny_room(), key("key_1"), Relation{RelationKind::in_room, "key_1", "room_1"});
  EXPECT_EQ(code_of([&] { add_node(g, key("key_1"), Relation{RelationKind::in_room, "key_1", "room_1"}); }),
            ErrorCode::DuplicateId);
}

TEST(AddNode, InsideNonContainer) {
  SceneGraph g = tiny_room();
  g.objects["lamp_1"] = make_object("lamp_1", "lamp", {Affordance::toggleable}, {{"on", false}});
  g.relations.insert({RelationKind::in_room, "lamp_1", "room_1"});
  ObjectNode note = make_object("note_1", "note", {Affordance::readable, Affordance::graspable});
  EXPECT_EQ(code_of([&] { add_node(g, note, Relation{RelationKind::inside, "note_1", "lamp_1"}); }),
            ErrorCode::InvariantViolation);
}

TEST(RemoveNode, HoistsContents) {
  SceneGraph g = add_node(tiny_room(), key("key_1"), Relation{RelationKind::inside, "key_1", "box_1"});
  const auto rev = g.revision;
  g = remove_node(g, "box_1");
  EXPECT_FALSE(g.contains("box_1"));
  EXPECT_EQ(g.parent_of("key_1"), (Relation{RelationKind::in_room, "key_1", "room_1"}));
  EXPECT_EQ(g.revision, rev + 1);
}

TEST(RemoveNode, UnknownId) {
  EXPECT_EQ(code_of([] { remove_node(tiny_room(), "ghost_7"); }), ErrorCode::UnknownId);
}

TEST(CheckInvariants, GeneratedRoomsAreClean) {
  for (int level = 1; level <= 4; ++level) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      LevelConfig c;
      c.level = level;
      c.seed = seed;
      EXPECT_TRUE(check_invariants(generate(c).graph).empty()) << "L" << level << " seed " << seed;
    }
  }
}

TEST(CheckInvariants, ContainmentCycle) {
  SceneGraph g = tiny_room();
  g.objects["box_2"] = make_object("box_2", "box", {Affordance::openable, Affordance::container}, {{"open", true}});
  g.relations.erase({RelationKind::in_room, "box_1", "room_1"});
  g.relations.insert({RelationKind::inside, "box_1", "box_2"});
  g.relations.insert({RelationKind::inside, "box_2", "box_1"});
  auto vs = check_invariants(g);
  ASSERT_TRUE(has_kind(vs, "CycleViolation"));
  for (const auto& v : vs) {
    if (v.kind != "CycleViolation") continue;
    EXPECT_NE(std::find(v.ids.begin(), v.ids.end(), "box_1"), v.ids.end());
    EXPECT_NE(std::find(v.ids.begin(), v.ids.end(), "box_2"), v.ids.end());
  }
}

TEST(CheckInvariants, AgentInTwoRooms) {
  SceneGraph g = tiny_room();
  g.rooms["room_2"] = {"room_2", "Other"};
  g.relations.insert({RelationKind::in_room, "agent_1", "room_2"});
  EXPECT_TRUE(has_kind(check_invariants(g), "AgentLocationViolation"));
}

TEST(Observe, OpeningRevealsContents) {
  SceneGraph g = add_node(tiny_room(), key("key_1"), Relation{RelationKind::inside, "key_1", "box_1"});
  g.objects.at("box_1").states["open"] = true;
  Observation obs = observe(g, "agent_1");
  const VisibleObject* k = obs.find("key_1");
  ASSERT_TRUE(k);
  EXPECT_NE(std::find(k->relations.begin(), k->relations.end(), Relation{RelationKind::inside, "key_1", "box_1"}),
            k->relations.end());
  EXPECT_TRUE(observation_violations(g, obs).empty());
}

TEST(Observe, EmptyRoomListsDoors) {
  SceneGraph g;
  g.rooms["room_1"] = {"room_1", "A"};
  g.rooms["room_2"] = {"room_2", "B"};
  g.objects["door_1"] = make_object("door_1", "door", {Affordance::openable}, {{"open", true}});
  g.relations.insert({RelationKind::in_room, "door_1", "room_1"});
  g.relations.insert({RelationKind::connects, "door_1", "room_1"});
  g.relations.insert({RelationKind::connects, "door_1", "room_2"});
  g.agents["agent_1"] = AgentNode{"agent_1", 1, {}, {}};
  g.relations.insert({RelationKind::in_room, "agent_1", "room_2"});
  Observation obs = observe(g, "agent_1");
  // The door itself is reachable from either side.
  ASSERT_EQ(obs.visible_objects.size(), 1u);
  EXPECT_EQ(obs.visible_objects[0].id, "door_1");
  ASSERT_EQ(obs.doors.size(), 1u);
  EXPECT_EQ(obs.doors[0].door_id, "door_1");
  EXPECT_EQ(obs.doors[0].destination, "room_1");
}

TEST(Serialization, RoundTripLevel3) {
  LevelConfig c;
  c.level = 3;
  c.seed = 5;
  SceneGraph g = generate(c).graph;
  SceneGraph back = scene_graph_from_json(to_json(g));
  EXPECT_TRUE(graph_equal(g, back, true));
  EXPECT_EQ(to_json(back).dump(), to_json(g).dump());
}

TEST(Serialization, MissingRooms) {
  json doc = to_json(tiny_room());
  doc.erase("rooms");
  try {
    scene_graph_from_json(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaError);
    EXPECT_EQ(e.path(), "/rooms");
  }
}

TEST(Serialization, DanglingRelation) {
  json doc = to_json(tiny_room());
  doc["relations"].push_back({{"kind", "in_room"}, {"src", "box_1"}, {"dst", "room_9"}});
  EXPECT_EQ(code_of([&] { scene_graph_from_json(doc); }), ErrorCode::SchemaError);
}
