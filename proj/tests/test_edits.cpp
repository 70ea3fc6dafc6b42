#include <gtest/gtest.h>

#include "support.hpp"
#include "vsim/edits.hpp"

using namespace vsim;
using fixtures::error_of;
using fixtures::two_room_house;

namespace {

bool annotated(const CheckReport& r, int index, const std::string& what) {
  for (const auto& [i, a] : r.annotations) {
    if (i == index && a == what) return true;
  }
  return false;
}

ObjectNode coin() { return fixtures::make_object("coin_1", "coin", {Affordance::graspable, Affordance::movable}); }

}  // namespace

TEST(Diff, IdenticalGraphsGiveNothing) {
  SceneGraph g = two_room_house(2);
  EXPECT_TRUE(diff(g, g).empty());
}

TEST(Diff, SingleChanges) {
  SceneGraph g = two_room_house(1);

  SceneGraph moved = g;
  moved.erase_location("key_1");
  moved.relations.insert({RelationKind::on_top, "key_1", "table_1"});
  EXPECT_EQ(diff(g, moved), (EditList{edit::Move{"key_1", RelationKind::on_top, "table_1"}}));

  SceneGraph lit = g;
  lit.objects["lamp_1"].states["on"] = true;
  EXPECT_EQ(diff(g, lit), (EditList{edit::SetState{"lamp_1", "on", true}}));

  SceneGraph added = add_node(g, coin(), Relation{RelationKind::in_room, "coin_1", "room_2"});
  EXPECT_EQ(diff(g, added), (EditList{edit::Add{coin(), RelationKind::in_room, "room_2"}}));
  EXPECT_EQ(diff(added, g), (EditList{edit::Remove{"coin_1"}}));

  SceneGraph walked = g;
  walked.erase_location("agent_1");
  walked.relations.insert({RelationKind::in_room, "agent_1", "room_2"});
  EXPECT_EQ(diff(g, walked), (EditList{edit::Move{"agent_1", RelationKind::in_room, "room_2"}}));
}

TEST(Diff, ClosesOverRandomMutations) {
  SplitMix64 rng(2024);
  for (int i = 0; i < 60; ++i) {
    SceneGraph base = fixtures::mutation_base(i);
    fixtures::Mutation m = fixtures::random_mutation(base, rng, 1 + static_cast<int>(rng.below(6)));
    EditResult r = apply_edits(base, diff(base, m.after));
    for (const auto& v : r.verdicts) EXPECT_TRUE(v.applied) << v.reason;
    EXPECT_TRUE(graph_equal(r.graph, m.after)) << i;
  }
}

TEST(ApplyEdits, FailuresAreRecordedAndSkipped) {
  SceneGraph g = two_room_house(1);
  EditResult r = apply_edits(g, {edit::Remove{"ghost_1"}, edit::SetState{"lamp_1", "on", true},
                                 edit::Add{coin(), RelationKind::on_top, "lamp_1"}});
  ASSERT_EQ(r.verdicts.size(), 3u);
  EXPECT_FALSE(r.verdicts[0].applied);
  EXPECT_EQ(r.verdicts[0].error, "UnknownId");
  EXPECT_TRUE(r.verdicts[1].applied);
  EXPECT_FALSE(r.verdicts[2].applied);
  EXPECT_TRUE(r.graph.object("lamp_1")->state_or("on", false));
  EXPECT_EQ(r.graph.object("coin_1"), nullptr);
}

TEST(ApplyEdits, SingleEditThrowsAndLeavesGraph) {
  SceneGraph g = two_room_house(1);
  SceneGraph before = g;
  EXPECT_EQ(error_of([&] { apply_edit(g, edit::Add{coin(), RelationKind::in_room, "room_9"}); }),
            ErrorCode::DanglingReference);
  EXPECT_TRUE(error_of([&] { apply_edit(g, edit::Move{"box_1", RelationKind::inside, "box_1"}); }).has_value());
  EXPECT_TRUE(error_of([&] { apply_edit(g, edit::Move{"agent_1", RelationKind::on_top, "table_1"}); }).has_value());
  EXPECT_TRUE(graph_equal(g, before, true));
}

TEST(ApplyEdits, ReplaceKeepsRelations) {
  SceneGraph g = two_room_house(1);
  ObjectNode vase = fixtures::make_object("key_1", "vase", {Affordance::graspable});
  apply_edit(g, edit::Replace{"key_1", vase});
  EXPECT_EQ(g.object("key_1")->category, "vase");
  EXPECT_EQ(g.parent_of("key_1")->dst, "room_1");
}

TEST(InterpretationCheck, HonestBatchPasses) {
  SceneGraph g = two_room_house(1);
  EditList edits{edit::SetState{"lamp_1", "on", true}, edit::Move{"ball_1", RelationKind::in_room, "room_1"}};
  EditResult r = apply_edits(g, edits);
  CheckReport c = interpretation_check(r.graph, edits, "agent_1", r.verdicts);
  EXPECT_TRUE(c.passed);
  EXPECT_TRUE(c.mismatches.empty());
  EXPECT_TRUE(c.annotations.empty());
}

TEST(InterpretationCheck, TamperedStateIsFlaggedBothSides) {
  SceneGraph g = two_room_house(1);
  EditList edits{edit::SetState{"lamp_1", "on", true}};
  EditResult r = apply_edits(g, edits);
  r.graph.objects["lamp_1"].states["on"] = false;
  CheckReport c = interpretation_check(r.graph, edits, "agent_1", r.verdicts);
  EXPECT_FALSE(c.passed);
  ASSERT_EQ(c.mismatches.size(), 2u);
  EXPECT_EQ(c.mismatches[0].source, "graph");
  EXPECT_EQ(c.mismatches[1].source, "view");
}

TEST(InterpretationCheck, ClosedContainerIsOccluded) {
  SceneGraph g = two_room_house(1);
  EditList edits{edit::Add{coin(), RelationKind::inside, "box_1"}};
  EditResult r = apply_edits(g, edits);
  CheckReport c = interpretation_check(r.graph, edits, "agent_1", r.verdicts);
  EXPECT_TRUE(c.passed);
  EXPECT_TRUE(annotated(c, 0, "occluded"));

  SceneGraph broken = fixtures::tamper(r.graph, edits[0]);
  CheckReport bad = interpretation_check(broken, edits, "agent_1", r.verdicts);
  EXPECT_FALSE(bad.passed);
}

TEST(InterpretationCheck, OtherRoomIsOccluded) {
  SceneGraph g = two_room_house(1);
  EditList edits{edit::Add{coin(), RelationKind::in_room, "room_2"}};
  EditResult r = apply_edits(g, edits);
  EXPECT_TRUE(annotated(interpretation_check(r.graph, edits, "agent_1", r.verdicts), 0, "occluded"));
  CheckReport from_room = interpretation_check(r.graph, edits, "room_2", r.verdicts);
  EXPECT_TRUE(from_room.passed);
  EXPECT_TRUE(from_room.annotations.empty());
}

TEST(InterpretationCheck, LaterEditSupersedes) {
  SceneGraph g = two_room_house(1);
  EditList edits{edit::SetState{"lamp_1", "on", true}, edit::SetState{"lamp_1", "on", false}};
  EditResult r = apply_edits(g, edits);
  CheckReport c = interpretation_check(r.graph, edits, "agent_1", r.verdicts);
  EXPECT_TRUE(c.passed);
  EXPECT_TRUE(annotated(c, 0, "superseded"));
  EXPECT_FALSE(annotated(c, 1, "superseded"));
}

TEST(InterpretationCheck, FailedEditFailsTheBatch) {
  SceneGraph g = two_room_house(1);
  EditList edits{edit::Remove{"ghost_1"}};
  EditResult r = apply_edits(g, edits);
  EXPECT_FALSE(interpretation_check(r.graph, edits, "agent_1", r.verdicts).passed);
}

TEST(InterpretationCheck, UnknownViewpoint) {
  SceneGraph g = two_room_house(1);
  EXPECT_EQ(error_of([&] { interpretation_check(g, {}, "nobody"); }), ErrorCode::UnknownViewpoint);
}

TEST(EditJson, RoundTripAndEnvelope) {
  EditList edits{edit::Add{coin(), RelationKind::on_top, "table_1"}, edit::Remove{"key_2"},
                 edit::Replace{"key_1", fixtures::make_object("key_1", "coin", {Affordance::graspable})}, edit::Move{"ball_1", RelationKind::held_by, "agent_1"},
                 edit::SetState{"box_1", "open", true}};
  json doc = to_json(edits);
  EXPECT_EQ(doc.at("schema_version"), "1");
  EXPECT_EQ(edit_list_from_json(doc), edits);
  EXPECT_EQ(edit_list_from_json(doc.at("edits")), edits);
  EXPECT_EQ(error_of([] { edit_list_from_json(json::array({{{"op", "teleport"}}})); }), ErrorCode::SchemaError);
}
