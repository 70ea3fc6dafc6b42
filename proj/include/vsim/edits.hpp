#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vsim/scene_graph.hpp"

namespace vsim {

namespace edit {

// Adds a new object under (relation, target). relation is one of in_room,
// inside, on_top, held_by.
struct Add {
  ObjectNode object;
  RelationKind relation = RelationKind::in_room;
  std::string target;
  bool operator==(const Add&) const = default;
};
struct Remove {
  std::string id;
  bool operator==(const Remove&) const = default;
};
// Swaps every attribute of `id` (category, name, affordances, states, clue,
// lock, colour, arrangement); relations are kept.
struct Replace {
  std::string id;
  ObjectNode object;
  bool operator==(const Replace&) const = default;
};
// Objects take any location kind; agents take in_room only.
struct Move {
  std::string id;
  RelationKind relation = RelationKind::in_room;
  std::string target;
  bool operator==(const Move&) const = default;
};
struct SetState {
  std::string id;
  std::string state;
  bool value = true;
  bool operator==(const SetState&) const = default;
};

}  // namespace edit

using Edit = std::variant<edit::Add, edit::Remove, edit::Replace, edit::Move, edit::SetState>;
using EditList = std::vector<Edit>;

json to_json(const Edit& e);
Edit edit_from_json(const json& doc, const std::string& path);
// Accepts a bare array or {"schema_version": "1", "edits": [...]}.
EditList edit_list_from_json(const json& doc);
json to_json(const EditList& edits);
// Ids an edit touches (subject first, then target).
std::vector<std::string> edit_ids(const Edit& e);

struct EditVerdict {
  bool applied = false;
  std::string error;  // ErrorCode name when failed
  std::string reason;
};

struct EditResult {
  SceneGraph graph;
  std::vector<EditVerdict> verdicts;
};

// In list order, each edit atomic; failures are recorded and skipped.
EditResult apply_edits(SceneGraph graph, const EditList& edits);
// Single edit; throws vsim::Error on failure and leaves `graph` untouched.
void apply_edit(SceneGraph& graph, const Edit& e);

// Normalized edit list turning `before` into `after`: adds (parents first,
// then by id), replaces, moves, state sets, removes, ids ascending within each
// class. Edits that cannot be applied in that order (for example a move that
// would close a cycle until another move happens) are pushed after the ones
// they depend on. Covers objects and agent locations; rooms and agent clue
// memory are expected to match.
EditList diff(const SceneGraph& before, const SceneGraph& after);

struct Mismatch {
  int edit = 0;
  std::string expected;
  std::string observed;
  std::string source;  // "graph" | "view"

  bool operator==(const Mismatch&) const = default;
};

struct CheckReport {
  std::vector<EditVerdict> verdicts;
  std::vector<Mismatch> mismatches;
  // edit index -> "occluded" for edits checked graph-side only;
  // "superseded" for edits overridden by a later edit in the batch.
  std::vector<std::pair<int, std::string>> annotations;
  bool passed = true;
};

// Evaluates each edit's postcondition against the graph and against the view
// from `viewpoint` (agent id or room id). Throws UnknownViewpoint.
CheckReport interpretation_check(const SceneGraph& graph, const EditList& edits, const std::string& viewpoint,
                                 const std::vector<EditVerdict>& verdicts = {});
// Same, with a caller-supplied view.
CheckReport interpretation_check(const SceneGraph& graph, const EditList& edits, const Observation& view,
                                 const std::vector<EditVerdict>& verdicts = {});

json to_json(const EditVerdict& v);
json to_json(const CheckReport& r);

}  // namespace vsim
