#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace vsim {

using json = nlohmann::json;

enum class Affordance {
  openable,
  lockable,
  graspable,
  movable,
  readable,
  toggleable,
  container,
  surface,
};

std::string_view to_string(Affordance a);
std::optional<Affordance> parse_affordance(std::string_view s);

enum class RelationKind { in_room, inside, on_top, held_by, connects };

std::string_view to_string(RelationKind k);
std::optional<RelationKind> parse_relation_kind(std::string_view s);

struct Relation {
  RelationKind kind;
  std::string src;
  std::string dst;

  auto operator<=>(const Relation&) const = default;
  bool operator==(const Relation&) const = default;
};

// True for the four kinds that give an object or agent its location.
bool is_location_kind(RelationKind k);

enum class LockMechanism { key, code };

struct LockSpec {
  LockMechanism mechanism = LockMechanism::key;
  std::optional<std::string> key_id;
  std::optional<std::string> code;

  bool operator==(const LockSpec&) const = default;
};

enum class Veracity { accurate, deceptive };

struct ClueText {
  std::string text;
  std::optional<std::string> referent;
  std::optional<std::string> payload;
  Veracity veracity = Veracity::accurate;

  bool operator==(const ClueText&) const = default;
};

// Ordered colour sequence that, when matched by an Arrange onto the owning
// surface, flips `reveals` to revealed=true.
struct ArrangementSpec {
  std::vector<std::string> order;
  std::string reveals;

  bool operator==(const ArrangementSpec&) const = default;
};

struct RoomNode {
  std::string id;
  std::string name;

  bool operator==(const RoomNode&) const = default;
};

// State keys: "open", "locked", "on", "revealed". Absent "revealed" means
// revealed.
namespace state {
inline constexpr std::string_view open = "open";
inline constexpr std::string_view locked = "locked";
inline constexpr std::string_view on = "on";
inline constexpr std::string_view revealed = "revealed";
}  // namespace state

struct ObjectNode {
  std::string id;
  std::string category;
  std::string display_name;
  std::set<Affordance> affordances;
  std::map<std::string, bool> states;
  std::optional<ClueText> clue;
  std::optional<LockSpec> lock;
  std::optional<std::string> color;
  std::optional<ArrangementSpec> arrangement;

  bool has(Affordance a) const { return affordances.count(a) != 0; }
  bool state_or(std::string_view key, bool fallback) const;
  bool is_open() const { return !has(Affordance::openable) || state_or(state::open, false); }
  bool is_locked() const { return state_or(state::locked, false); }
  bool is_revealed() const { return state_or(state::revealed, true); }

  bool operator==(const ObjectNode&) const = default;
};

struct ReadClue {
  std::string object_id;
  ClueText clue;

  bool operator==(const ReadClue&) const = default;
};

struct AgentNode {
  std::string id;
  int capacity = 1;
  std::vector<std::string> holding;  // kept sorted
  std::vector<ReadClue> read_clues;  // insertion order, unique by object_id

  bool has_read(std::string_view object_id) const;

  bool operator==(const AgentNode&) const = default;
};

using Node = std::variant<RoomNode, ObjectNode, AgentNode>;

class SceneGraph {
 public:
  std::map<std::string, RoomNode> rooms;
  std::map<std::string, ObjectNode> objects;
  std::map<std::string, AgentNode> agents;
  std::set<Relation> relations;
  std::uint64_t revision = 0;

  bool contains(std::string_view id) const;
  bool is_room(std::string_view id) const { return rooms.count(std::string(id)) != 0; }

  const ObjectNode* object(std::string_view id) const;
  ObjectNode* object(std::string_view id);
  const AgentNode* agent(std::string_view id) const;
  AgentNode* agent(std::string_view id);

  // Location parent of an object or agent (in_room / inside / on_top /
  // held_by). Empty when there is none or more than one.
  std::optional<Relation> parent_of(std::string_view id) const;
  // Objects directly inside or on top of `id`, sorted.
  std::vector<std::string> children_of(std::string_view id) const;
  // Room an object or agent is ultimately in; held objects resolve through
  // the holder. Empty on broken chains.
  std::string room_of(std::string_view id) const;
  // Rooms joined by a door (the dst of its connects relations), sorted.
  std::vector<std::string> door_rooms(std::string_view door_id) const;
  bool is_door(std::string_view id) const;
  // Doors with a connects relation to `room`, sorted.
  std::vector<std::string> doors_of_room(std::string_view room) const;

  void erase_location(std::string_view id);
  void set_location(Relation rel);
  void touch() { ++revision; }
};

struct Violation {
  std::string kind;
  std::vector<std::string> ids;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

SceneGraph add_node(SceneGraph graph, Node node, std::optional<Relation> placement = std::nullopt);
SceneGraph remove_node(SceneGraph graph, const std::string& id);
std::vector<Violation> check_invariants(const SceneGraph& graph);

// Whether an object can be perceived and touched from a room (and by an
// agent, for held items). Ordering of failure kinds matters to callers.
enum class Access { ok, unknown, wrong_room, closed_container };
Access access_from(const SceneGraph& graph, std::string_view room, std::string_view agent,
                   std::string_view object_id);

struct VisibleObject {
  std::string id;
  std::string category;
  std::string name;
  std::set<Affordance> affordances;
  std::map<std::string, bool> states;
  std::optional<std::string> color;
  std::vector<Relation> relations;
};

struct DoorView {
  std::string door_id;
  bool open = false;
  bool locked = false;
  std::string destination;
  std::optional<LockMechanism> lock;
  std::optional<int> code_length;
};

struct ClueView {
  std::string object_id;
  std::string text;
  std::optional<std::string> referent;
  std::optional<std::string> payload;
};

struct Observation {
  std::string agent_id;
  std::string room_id;
  std::vector<VisibleObject> visible_objects;
  std::vector<std::string> held;
  std::vector<DoorView> doors;
  std::vector<ClueView> read_clues;
  std::vector<std::string> co_located_agents;

  const VisibleObject* find(std::string_view id) const;
};

Observation observe(const SceneGraph& graph, const std::string& agent_id);
// Disembodied viewpoint standing in a room; no held items or clue memory.
Observation observe_room(const SceneGraph& graph, const std::string& room_id);
// Ids in `obs` that break the soundness rules against `graph`.
std::vector<std::string> observation_violations(const SceneGraph& graph, const Observation& obs);

json to_json(const SceneGraph& graph);
SceneGraph scene_graph_from_json(const json& doc);
json to_json(const ObjectNode& object);
ObjectNode object_from_json(const json& doc, const std::string& path);
json to_json(const Relation& rel);
Relation relation_from_json(const json& doc, const std::string& path);
json to_json(const Observation& obs);
json to_json(const ClueText& clue);

// Structural equality: node sets, relation sets, states, clue memory.
bool graph_equal(const SceneGraph& a, const SceneGraph& b, bool compare_revision = false);

bool is_valid_identifier(std::string_view id);

}  // namespace vsim
