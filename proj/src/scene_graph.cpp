#include "vsim/scene_graph.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "json_util.hpp"
#include "vsim/error.hpp"

namespace vsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::RoomOccupied: return "RoomOccupied";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::CycleError: return "CycleError";
    case ErrorCode::GenerationFailure: return "GenerationFailure";
    case ErrorCode::InstantiationError: return "InstantiationError";
    case ErrorCode::DuplicateAgent: return "DuplicateAgent";
    case ErrorCode::TraceIncomplete: return "TraceIncomplete";
    case ErrorCode::UnknownViewpoint: return "UnknownViewpoint";
    case ErrorCode::PolicyError: return "PolicyError";
    case ErrorCode::EndpointError: return "EndpointError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Error";
}

namespace {

constexpr std::string_view kAffordanceNames[] = {
    "openable", "lockable", "graspable", "movable", "readable", "toggleable", "container", "surface"};
constexpr std::string_view kRelationNames[] = {"in_room", "inside", "on_top", "held_by", "connects"};

}  // namespace

std::string_view to_string(Affordance a) { return kAffordanceNames[static_cast<int>(a)]; }

std::optional<Affordance> parse_affordance(std::string_view s) {
  for (int i = 0; i < 8; ++i) {
    if (kAffordanceNames[i] == s) return static_cast<Affordance>(i);
  }
  return std::nullopt;
}

std::string_view to_string(RelationKind k) { return kRelationNames[static_cast<int>(k)]; }

std::optional<RelationKind> parse_relation_kind(std::string_view s) {
  for (int i = 0; i < 5; ++i) {
    if (kRelationNames[i] == s) return static_cast<RelationKind>(i);
  }
  return std::nullopt;
}

bool is_location_kind(RelationKind k) { return k != RelationKind::connects; }

bool is_valid_identifier(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':';
  });
}

bool ObjectNode::state_or(std::string_view key, bool fallback) const {
  auto it = states.find(std::string(key));
  return it == states.end() ? fallback : it->second;
}

bool AgentNode::has_read(std::string_view object_id) const {
  return std::any_of(read_clues.begin(), read_clues.end(),
                     [&](const ReadClue& rc) { return rc.object_id == object_id; });
}

const VisibleObject* Observation::find(std::string_view id) const {
  for (const auto& v : visible_objects) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// SceneGraph queries

bool SceneGraph::contains(std::string_view id) const {
  std::string key(id);
  return rooms.count(key) || objects.count(key) || agents.count(key);
}

const ObjectNode* SceneGraph::object(std::string_view id) const {
  auto it = objects.find(std::string(id));
  return it == objects.end() ? nullptr : &it->second;
}

ObjectNode* SceneGraph::object(std::string_view id) {
  auto it = objects.find(std::string(id));
  return it == objects.end() ? nullptr : &it->second;
}

const AgentNode* SceneGraph::agent(std::string_view id) const {
  auto it = agents.find(std::string(id));
  return it == agents.end() ? nullptr : &it->second;
}

AgentNode* SceneGraph::agent(std::string_view id) {
  auto it = agents.find(std::string(id));
  return it == agents.end() ? nullptr : &it->second;
}

std::optional<Relation> SceneGraph::parent_of(std::string_view id) const {
  std::optional<Relation> found;
  for (const auto& rel : relations) {
    if (rel.src == id && is_location_kind(rel.kind)) {
      if (found) return std::nullopt;
      found = rel;
    }
  }
  return found;
}

std::vector<std::string> SceneGraph::children_of(std::string_view id) const {
  std::vector<std::string> out;
  for (const auto& rel : relations) {
    if ((rel.kind == RelationKind::inside || rel.kind == RelationKind::on_top) && rel.dst == id) {
      out.push_back(rel.src);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string SceneGraph::room_of(std::string_view id) const {
  std::string cur(id);
  for (std::size_t steps = 0; steps <= objects.size() + agents.size() + 1; ++steps) {
    auto parent = parent_of(cur);
    if (!parent) return {};
    if (parent->kind == RelationKind::in_room) return parent->dst;
    cur = parent->dst;
  }
  return {};
}

std::vector<std::string> SceneGraph::door_rooms(std::string_view door_id) const {
  std::vector<std::string> out;
  for (const auto& rel : relations) {
    if (rel.kind == RelationKind::connects && rel.src == door_id) out.push_back(rel.dst);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool SceneGraph::is_door(std::string_view id) const {
  return std::any_of(relations.begin(), relations.end(), [&](const Relation& r) {
    return r.kind == RelationKind::connects && r.src == id;
  });
}

std::vector<std::string> SceneGraph::doors_of_room(std::string_view room) const {
  std::vector<std::string> out;
  for (const auto& rel : relations) {
    if (rel.kind == RelationKind::connects && rel.dst == room) out.push_back(rel.src);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void SceneGraph::erase_location(std::string_view id) {
  for (auto it = relations.begin(); it != relations.end();) {
    if (it->src == id && is_location_kind(it->kind)) {
      it = relations.erase(it);
    } else {
      ++it;
    }
  }
}

void SceneGraph::set_location(Relation rel) {
  erase_location(rel.src);
  relations.insert(std::move(rel));
}

// ---------------------------------------------------------------------------
// Invariants

namespace {

enum class NodeClass { none, room, object, agent };

NodeClass class_of(const SceneGraph& g, const std::string& id) {
  if (g.rooms.count(id)) return NodeClass::room;
  if (g.objects.count(id)) return NodeClass::object;
  if (g.agents.count(id)) return NodeClass::agent;
  return NodeClass::none;
}

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void check_object(const SceneGraph& g, const ObjectNode& o, std::vector<Violation>& out) {
  if (o.has(Affordance::container) && o.has(Affordance::surface)) {
    out.push_back({"AffordanceConflict", {o.id}, "container and surface on one object"});
  }
  for (const auto& [key, value] : o.states) {
    (void)value;
    bool ok = true;
    if (key == state::open) ok = o.has(Affordance::openable);
    else if (key == state::locked) ok = o.has(Affordance::lockable);
    else if (key == state::on) ok = o.has(Affordance::toggleable);
    else if (key != state::revealed) ok = false;
    if (!ok) out.push_back({"StateAffordanceViolation", {o.id}, "state '" + key + "' not enabled"});
  }
  if (o.lock) {
    if (!o.has(Affordance::lockable)) {
      out.push_back({"LockViolation", {o.id}, "lock on non-lockable object"});
    }
    const auto& lock = *o.lock;
    if (lock.mechanism == LockMechanism::key) {
      if (!lock.key_id || lock.code) {
        out.push_back({"LockViolation", {o.id}, "key lock needs key_id and no code"});
      } else if (auto cls = class_of(g, *lock.key_id); cls == NodeClass::room || cls == NodeClass::agent) {
        out.push_back({"LockViolation", {o.id, *lock.key_id}, "key_id names a non-object"});
      }
    } else {
      if (!lock.code || lock.key_id || lock.code->size() < 2 || lock.code->size() > 8 ||
          !all_digits(*lock.code)) {
        out.push_back({"LockViolation", {o.id}, "code lock needs 2-8 digits and no key_id"});
      }
    }
  }
  if (o.clue && !o.has(Affordance::readable)) {
    out.push_back({"ClueViolation", {o.id}, "clue on non-readable object"});
  }
  if (o.arrangement) {
    if (!o.has(Affordance::surface) || o.arrangement->order.empty()) {
      out.push_back({"ArrangementViolation", {o.id}, "arrangement needs a surface and a non-empty order"});
    }
  }
}

}  // namespace

std::vector<Violation> check_invariants(const SceneGraph& g) {
  std::vector<Violation> out;

  // Identifier uniqueness across node classes and key/id agreement.
  for (const auto& [id, r] : g.rooms) {
    if (id != r.id) out.push_back({"IdMismatch", {id, r.id}, "map key differs from node id"});
    if (g.objects.count(id) || g.agents.count(id)) out.push_back({"DuplicateId", {id}, "id used twice"});
    if (r.name.empty()) out.push_back({"EmptyName", {id}, "room name is empty"});
  }
  for (const auto& [id, o] : g.objects) {
    if (id != o.id) out.push_back({"IdMismatch", {id, o.id}, "map key differs from node id"});
    if (g.agents.count(id)) out.push_back({"DuplicateId", {id}, "id used twice"});
    check_object(g, o, out);
  }
  for (const auto& [id, a] : g.agents) {
    if (id != a.id) out.push_back({"IdMismatch", {id, a.id}, "map key differs from node id"});
  }

  // Relation endpoint classes.
  for (const auto& rel : g.relations) {
    NodeClass s = class_of(g, rel.src);
    NodeClass d = class_of(g, rel.dst);
    if (s == NodeClass::none || d == NodeClass::none) {
      out.push_back({"DanglingReference", {rel.src, rel.dst}, std::string(to_string(rel.kind))});
      continue;
    }
    bool ok = rel.src != rel.dst;
    switch (rel.kind) {
      case RelationKind::in_room:
        ok = ok && (s == NodeClass::object || s == NodeClass::agent) && d == NodeClass::room;
        break;
      case RelationKind::inside:
        ok = ok && s == NodeClass::object && d == NodeClass::object &&
             g.objects.at(rel.dst).has(Affordance::container);
        break;
      case RelationKind::on_top:
        ok = ok && s == NodeClass::object && d == NodeClass::object &&
             g.objects.at(rel.dst).has(Affordance::surface);
        break;
      case RelationKind::held_by:
        ok = ok && s == NodeClass::object && d == NodeClass::agent;
        break;
      case RelationKind::connects:
        ok = ok && s == NodeClass::object && d == NodeClass::room &&
             g.objects.at(rel.src).has(Affordance::openable);
        break;
    }
    if (!ok) {
      out.push_back({"RelationEndpointViolation", {rel.src, rel.dst},
                     std::string(to_string(rel.kind)) + " has wrong endpoint classes"});
    }
  }

  // Location forest.
  std::map<std::string, std::vector<Relation>> parents;
  for (const auto& rel : g.relations) {
    if (is_location_kind(rel.kind)) parents[rel.src].push_back(rel);
  }
  for (const auto& [id, o] : g.objects) {
    (void)o;
    auto it = parents.find(id);
    std::size_t n = it == parents.end() ? 0 : it->second.size();
    if (n != 1) {
      out.push_back({"ParentViolation", {id}, "object has " + std::to_string(n) + " location parents"});
    }
  }
  std::set<std::string> reported_cycle;
  for (const auto& [id, o] : g.objects) {
    (void)o;
    std::vector<std::string> chain;
    std::set<std::string> seen;
    std::string cur = id;
    while (true) {
      auto it = parents.find(cur);
      if (it == parents.end() || it->second.size() != 1) break;
      const Relation& p = it->second.front();
      if (p.kind != RelationKind::inside && p.kind != RelationKind::on_top) break;
      if (!seen.insert(cur).second) {
        // cur repeats: collect the cycle members starting at cur.
        std::vector<std::string> cycle;
        auto pos = std::find(chain.begin(), chain.end(), cur);
        cycle.assign(pos, chain.end());
        std::sort(cycle.begin(), cycle.end());
        if (!reported_cycle.count(cycle.front())) {
          for (const auto& c : cycle) reported_cycle.insert(c);
          out.push_back({"CycleViolation", cycle, "containment cycle"});
        }
        break;
      }
      chain.push_back(cur);
      cur = p.dst;
    }
  }

  for (const auto& [id, a] : g.agents) {
    auto it = parents.find(id);
    std::size_t in_room = 0;
    std::size_t other = 0;
    if (it != parents.end()) {
      for (const auto& r : it->second) (r.kind == RelationKind::in_room ? in_room : other)++;
    }
    if (in_room != 1 || other != 0) {
      out.push_back({"AgentLocationViolation", {id}, "agent needs exactly one in_room relation"});
    }
    if (static_cast<int>(a.holding.size()) > a.capacity || a.capacity < 1) {
      out.push_back({"HoldingViolation", {id}, "holding exceeds capacity"});
    }
    for (const auto& h : a.holding) {
      if (!g.relations.count(Relation{RelationKind::held_by, h, id})) {
        out.push_back({"HoldingViolation", {id, h}, "held object lacks held_by relation"});
      }
    }
    if (!std::is_sorted(a.holding.begin(), a.holding.end())) {
      out.push_back({"HoldingViolation", {id}, "holding list not canonical"});
    }
  }
  for (const auto& rel : g.relations) {
    if (rel.kind != RelationKind::held_by) continue;
    const AgentNode* a = g.agent(rel.dst);
    if (a && std::find(a->holding.begin(), a->holding.end(), rel.src) == a->holding.end()) {
      out.push_back({"HoldingViolation", {rel.dst, rel.src}, "held_by relation not in holding list"});
    }
  }

  // Doors: exactly two connects relations to distinct rooms.
  std::map<std::string, std::vector<std::string>> connects;
  for (const auto& rel : g.relations) {
    if (rel.kind == RelationKind::connects) connects[rel.src].push_back(rel.dst);
  }
  for (const auto& [door, rooms] : connects) {
    if (rooms.size() != 2 || rooms[0] == rooms[1]) {
      out.push_back({"ConnectsViolation", {door}, "door must join exactly two distinct rooms"});
    }
  }

  return out;
}

// ---------------------------------------------------------------------------
// Mutation

namespace {

const std::string& node_id(const Node& n) {
  return std::visit([](const auto& v) -> const std::string& { return v.id; }, n);
}

std::string summarize(const std::vector<Violation>& vs) {
  std::string s;
  for (const auto& v : vs) {
    if (!s.empty()) s += "; ";
    s += v.kind;
    for (const auto& id : v.ids) s += " " + id;
  }
  return s;
}

}  // namespace

SceneGraph add_node(SceneGraph graph, Node node, std::optional<Relation> placement) {
  const std::string id = node_id(node);
  if (!is_valid_identifier(id)) throw Error(ErrorCode::InvariantViolation, "invalid identifier '" + id + "'");
  if (graph.contains(id)) throw Error(ErrorCode::DuplicateId, "id '" + id + "' already present");
  if (placement) {
    if (placement->src != id) {
      throw Error(ErrorCode::InvariantViolation, "placement must start at the new node");
    }
    if (!graph.contains(placement->dst)) {
      throw Error(ErrorCode::DanglingReference, "placement target '" + placement->dst + "' unknown");
    }
  }
  if (const auto* obj = std::get_if<ObjectNode>(&node)) {
    if (obj->lock && obj->lock->key_id && !graph.object(*obj->lock->key_id)) {
      throw Error(ErrorCode::DanglingReference, "lock key '" + *obj->lock->key_id + "' unknown");
    }
    if (obj->clue && obj->clue->referent && !graph.contains(*obj->clue->referent)) {
      throw Error(ErrorCode::DanglingReference, "clue referent '" + *obj->clue->referent + "' unknown");
    }
  }
  std::visit(
      [&](auto&& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RoomNode>) graph.rooms.emplace(id, std::move(v));
        if constexpr (std::is_same_v<T, ObjectNode>) graph.objects.emplace(id, std::move(v));
        if constexpr (std::is_same_v<T, AgentNode>) {
          std::sort(v.holding.begin(), v.holding.end());
          graph.agents.emplace(id, std::move(v));
        }
      },
      std::move(node));
  if (placement) {
    if (placement->kind == RelationKind::held_by) {
      if (AgentNode* a = graph.agent(placement->dst)) {
        a->holding.push_back(id);
        std::sort(a->holding.begin(), a->holding.end());
      }
    }
    graph.relations.insert(*placement);
  }
  auto violations = check_invariants(graph);
  if (!violations.empty()) throw Error(ErrorCode::InvariantViolation, summarize(violations));
  graph.touch();
  return graph;
}

SceneGraph remove_node(SceneGraph graph, const std::string& id) {
  if (!graph.contains(id)) throw Error(ErrorCode::UnknownId, "unknown id '" + id + "'");

  if (graph.rooms.count(id)) {
    for (const auto& [aid, a] : graph.agents) {
      (void)a;
      if (graph.room_of(aid) == id) throw Error(ErrorCode::RoomOccupied, "room '" + id + "' holds agents");
    }
    for (const auto& rel : graph.relations) {
      if (rel.dst == id) {
        throw Error(ErrorCode::InvariantViolation, "room '" + id + "' still referenced by '" + rel.src + "'");
      }
    }
    graph.rooms.erase(id);
    graph.touch();
    return graph;
  }

  const std::string room = graph.room_of(id);
  if (graph.agents.count(id)) {
    for (const auto& held : graph.agents.at(id).holding) {
      graph.set_location({RelationKind::in_room, held, room});
    }
    graph.erase_location(id);
    graph.agents.erase(id);
    graph.touch();
    return graph;
  }

  // Object: hoist direct children to the enclosing room, drop incident edges.
  for (const auto& child : graph.children_of(id)) {
    graph.set_location({RelationKind::in_room, child, room});
  }
  if (auto parent = graph.parent_of(id); parent && parent->kind == RelationKind::held_by) {
    if (AgentNode* a = graph.agent(parent->dst)) {
      a->holding.erase(std::remove(a->holding.begin(), a->holding.end(), id), a->holding.end());
    }
  }
  for (auto it = graph.relations.begin(); it != graph.relations.end();) {
    if (it->src == id || it->dst == id) {
      it = graph.relations.erase(it);
    } else {
      ++it;
    }
  }
  graph.objects.erase(id);
  graph.touch();
  return graph;
}

// ---------------------------------------------------------------------------
// Visibility

Access access_from(const SceneGraph& g, std::string_view room, std::string_view agent,
                   std::string_view object_id) {
  const ObjectNode* obj = g.object(object_id);
  if (!obj || !obj->is_revealed()) return Access::unknown;
  if (g.is_door(object_id)) {
    auto rooms = g.door_rooms(object_id);
    return std::find(rooms.begin(), rooms.end(), room) != rooms.end() ? Access::ok : Access::wrong_room;
  }
  bool closed = false;
  std::string cur(object_id);
  for (std::size_t steps = 0; steps <= g.objects.size() + 1; ++steps) {
    auto parent = g.parent_of(cur);
    if (!parent) return Access::unknown;
    switch (parent->kind) {
      case RelationKind::held_by:
        if (parent->dst != agent) return Access::wrong_room;
        return closed ? Access::closed_container : Access::ok;
      case RelationKind::in_room:
        if (parent->dst != room) return Access::wrong_room;
        return closed ? Access::closed_container : Access::ok;
      case RelationKind::inside:
      case RelationKind::on_top: {
        const ObjectNode* host = g.object(parent->dst);
        if (!host || !host->is_revealed()) return Access::unknown;
        if (parent->kind == RelationKind::inside && !host->is_open()) closed = true;
        cur = parent->dst;
        break;
      }
      case RelationKind::connects:
        return Access::unknown;
    }
  }
  return Access::unknown;
}

namespace {

Observation observe_from(const SceneGraph& g, const std::string& room, const AgentNode* agent) {
  Observation obs;
  obs.agent_id = agent ? agent->id : std::string{};
  obs.room_id = room;
  const std::string agent_id = obs.agent_id;
  for (const auto& [id, o] : g.objects) {
    if (access_from(g, room, agent_id, id) != Access::ok) continue;
    VisibleObject v;
    v.id = id;
    v.category = o.category;
    v.name = o.display_name;
    v.affordances = o.affordances;
    v.states = o.states;
    v.color = o.color;
    for (const auto& rel : g.relations) {
      if (rel.src == id) v.relations.push_back(rel);
    }
    obs.visible_objects.push_back(std::move(v));
  }
  if (agent) obs.held = agent->holding;
  for (const auto& door : g.doors_of_room(room)) {
    const ObjectNode* d = g.object(door);
    if (!d || !d->is_revealed()) continue;
    for (const auto& dest : g.door_rooms(door)) {
      if (dest == room) continue;
      DoorView view;
      view.door_id = door;
      view.open = d->is_open();
      view.locked = d->is_locked();
      view.destination = dest;
      if (d->lock) {
        view.lock = d->lock->mechanism;
        if (d->lock->mechanism == LockMechanism::code && d->lock->code) {
          view.code_length = static_cast<int>(d->lock->code->size());
        }
      }
      obs.doors.push_back(std::move(view));
    }
  }
  if (agent) {
    for (const auto& rc : agent->read_clues) {
      obs.read_clues.push_back({rc.object_id, rc.clue.text, rc.clue.referent, rc.clue.payload});
    }
  }
  for (const auto& [aid, a] : g.agents) {
    (void)a;
    if (aid != agent_id && g.room_of(aid) == room) obs.co_located_agents.push_back(aid);
  }
  return obs;
}

}  // namespace

Observation observe(const SceneGraph& g, const std::string& agent_id) {
  const AgentNode* agent = g.agent(agent_id);
  if (!agent) throw Error(ErrorCode::UnknownAgent, "unknown agent '" + agent_id + "'");
  return observe_from(g, g.room_of(agent_id), agent);
}

Observation observe_room(const SceneGraph& g, const std::string& room_id) {
  if (!g.is_room(room_id)) throw Error(ErrorCode::UnknownViewpoint, "unknown room '" + room_id + "'");
  return observe_from(g, room_id, nullptr);
}

std::vector<std::string> observation_violations(const SceneGraph& g, const Observation& obs) {
  std::vector<std::string> bad;
  for (const auto& v : obs.visible_objects) {
    if (access_from(g, obs.room_id, obs.agent_id, v.id) != Access::ok) bad.push_back(v.id);
  }
  const AgentNode* agent = g.agent(obs.agent_id);
  for (const auto& c : obs.read_clues) {
    if (!agent || !agent->has_read(c.object_id)) bad.push_back(c.object_id);
  }
  return bad;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using detail::check_keys;
using detail::get_array;
using detail::get_id;
using detail::get_string;
using detail::opt_string;

ClueText clue_from_json(const json& doc, const std::string& path) {
  check_keys(doc, path, {"text"}, {"referent", "payload", "veracity"});
  ClueText c;
  c.text = get_string(doc, "text", path);
  c.referent = opt_string(doc, "referent", path);
  c.payload = opt_string(doc, "payload", path);
  if (auto v = opt_string(doc, "veracity", path)) {
    if (*v == "accurate") c.veracity = Veracity::accurate;
    else if (*v == "deceptive") c.veracity = Veracity::deceptive;
    else throw schema_error(path + "/veracity", "expected accurate|deceptive");
  }
  return c;
}

}  // namespace

json to_json(const ClueText& c) {
  json j = {{"text", c.text}, {"veracity", c.veracity == Veracity::accurate ? "accurate" : "deceptive"}};
  if (c.referent) j["referent"] = *c.referent;
  if (c.payload) j["payload"] = *c.payload;
  return j;
}

json to_json(const Relation& r) {
  return {{"kind", to_string(r.kind)}, {"src", r.src}, {"dst", r.dst}};
}

Relation relation_from_json(const json& doc, const std::string& path) {
  check_keys(doc, path, {"kind", "src", "dst"}, {});
  auto kind = parse_relation_kind(get_string(doc, "kind", path));
  if (!kind) throw schema_error(path + "/kind", "unknown relation kind");
  return {*kind, get_id(doc, "src", path), get_id(doc, "dst", path)};
}

json to_json(const ObjectNode& o) {
  json aff = json::array();
  for (auto a : o.affordances) aff.push_back(to_string(a));
  json j = {{"id", o.id},
            {"category", o.category},
            {"name", o.display_name},
            {"affordances", aff},
            {"states", json(o.states)}};
  if (o.clue) j["clue"] = to_json(*o.clue);
  if (o.lock) {
    json l = {{"mechanism", o.lock->mechanism == LockMechanism::key ? "key" : "code"}};
    if (o.lock->key_id) l["key_id"] = *o.lock->key_id;
    if (o.lock->code) l["code"] = *o.lock->code;
    j["lock"] = l;
  }
  if (o.color) j["color"] = *o.color;
  if (o.arrangement) j["arrangement"] = {{"order", o.arrangement->order}, {"reveals", o.arrangement->reveals}};
  return j;
}

ObjectNode object_from_json(const json& doc, const std::string& path) {
  check_keys(doc, path, {"id", "category", "name", "affordances", "states"},
             {"clue", "lock", "color", "arrangement"});
  ObjectNode o;
  o.id = get_id(doc, "id", path);
  o.category = get_string(doc, "category", path);
  o.display_name = get_string(doc, "name", path);
  const auto& aff = get_array(doc, "affordances", path);
  for (std::size_t i = 0; i < aff.size(); ++i) {
    auto a = aff[i].is_string() ? parse_affordance(aff[i].get<std::string>()) : std::nullopt;
    if (!a) throw schema_error(path + "/affordances/" + std::to_string(i), "unknown affordance");
    o.affordances.insert(*a);
  }
  const auto& st = doc.at("states");
  if (!st.is_object()) throw schema_error(path + "/states", "expected object");
  for (const auto& [key, value] : st.items()) {
    if (!value.is_boolean()) throw schema_error(path + "/states/" + key, "expected boolean");
    o.states[key] = value.get<bool>();
  }
  if (doc.contains("clue") && !doc.at("clue").is_null()) o.clue = clue_from_json(doc.at("clue"), path + "/clue");
  if (doc.contains("lock") && !doc.at("lock").is_null()) {
    const auto& l = doc.at("lock");
    const std::string lp = path + "/lock";
    check_keys(l, lp, {"mechanism"}, {"key_id", "code"});
    LockSpec spec;
    std::string mech = get_string(l, "mechanism", lp);
    if (mech == "key") spec.mechanism = LockMechanism::key;
    else if (mech == "code") spec.mechanism = LockMechanism::code;
    else throw schema_error(lp + "/mechanism", "expected key|code");
    spec.key_id = opt_string(l, "key_id", lp);
    spec.code = opt_string(l, "code", lp);
    o.lock = spec;
  }
  o.color = opt_string(doc, "color", path);
  if (doc.contains("arrangement") && !doc.at("arrangement").is_null()) {
    const auto& a = doc.at("arrangement");
    const std::string ap = path + "/arrangement";
    check_keys(a, ap, {"order", "reveals"}, {});
    ArrangementSpec spec;
    const auto& order = get_array(a, "order", ap);
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (!order[i].is_string()) throw schema_error(ap + "/order/" + std::to_string(i), "expected string");
      spec.order.push_back(order[i].get<std::string>());
    }
    spec.reveals = get_id(a, "reveals", ap);
    o.arrangement = spec;
  }
  return o;
}

json to_json(const SceneGraph& g) {
  json rooms = json::array();
  for (const auto& [id, r] : g.rooms) rooms.push_back({{"id", id}, {"name", r.name}});
  json objects = json::array();
  for (const auto& [id, o] : g.objects) {
    (void)id;
    objects.push_back(to_json(o));
  }
  json agents = json::array();
  for (const auto& [id, a] : g.agents) {
    json clues = json::array();
    for (const auto& rc : a.read_clues) clues.push_back({{"object", rc.object_id}, {"clue", to_json(rc.clue)}});
    agents.push_back({{"id", id}, {"capacity", a.capacity}, {"holding", a.holding}, {"read_clues", clues}});
  }
  json relations = json::array();
  for (const auto& rel : g.relations) relations.push_back(to_json(rel));
  return {{"rooms", rooms}, {"objects", objects}, {"agents", agents}, {"relations", relations},
          {"revision", g.revision}};
}

SceneGraph scene_graph_from_json(const json& doc) {
  check_keys(doc, "", {"rooms", "objects", "agents", "relations", "revision"}, {});
  SceneGraph g;
  std::set<std::string> ids;
  auto claim = [&](const std::string& id, const std::string& path) {
    if (!ids.insert(id).second) throw schema_error(path, "duplicate id '" + id + "'");
  };

  const auto& rooms = get_array(doc, "rooms", "");
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const std::string p = "/rooms/" + std::to_string(i);
    check_keys(rooms[i], p, {"id", "name"}, {});
    RoomNode r{get_id(rooms[i], "id", p), get_string(rooms[i], "name", p)};
    claim(r.id, p + "/id");
    g.rooms.emplace(r.id, r);
  }
  const auto& objects = get_array(doc, "objects", "");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string p = "/objects/" + std::to_string(i);
    ObjectNode o = object_from_json(objects[i], p);
    claim(o.id, p + "/id");
    g.objects.emplace(o.id, std::move(o));
  }
  const auto& agents = get_array(doc, "agents", "");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string p = "/agents/" + std::to_string(i);
    const auto& a = agents[i];
    check_keys(a, p, {"id"}, {"capacity", "holding", "read_clues"});
    AgentNode agent;
    agent.id = get_id(a, "id", p);
    if (a.contains("capacity")) {
      if (!a.at("capacity").is_number_integer()) throw schema_error(p + "/capacity", "expected integer");
      agent.capacity = a.at("capacity").get<int>();
    }
    if (a.contains("holding")) {
      const auto& h = get_array(a, "holding", p);
      for (std::size_t k = 0; k < h.size(); ++k) {
        if (!h[k].is_string()) throw schema_error(p + "/holding/" + std::to_string(k), "expected string");
        agent.holding.push_back(h[k].get<std::string>());
      }
      std::sort(agent.holding.begin(), agent.holding.end());
    }
    if (a.contains("read_clues")) {
      const auto& rc = get_array(a, "read_clues", p);
      for (std::size_t k = 0; k < rc.size(); ++k) {
        const std::string cp = p + "/read_clues/" + std::to_string(k);
        check_keys(rc[k], cp, {"object", "clue"}, {});
        agent.read_clues.push_back({get_id(rc[k], "object", cp), clue_from_json(rc[k].at("clue"), cp + "/clue")});
      }
    }
    claim(agent.id, p + "/id");
    g.agents.emplace(agent.id, std::move(agent));
  }
  const auto& relations = get_array(doc, "relations", "");
  for (std::size_t i = 0; i < relations.size(); ++i) {
    const std::string p = "/relations/" + std::to_string(i);
    Relation rel = relation_from_json(relations[i], p);
    for (const auto* end : {&rel.src, &rel.dst}) {
      if (!ids.count(*end)) throw schema_error(p, "dangling reference '" + *end + "'");
    }
    g.relations.insert(std::move(rel));
  }
  for (const auto& [aid, a] : g.agents) {
    for (const auto& h : a.holding) {
      if (!g.objects.count(h)) throw schema_error("/agents", "agent '" + aid + "' holds unknown '" + h + "'");
    }
  }
  const auto& rev = doc.at("revision");
  if (!rev.is_number_unsigned() && !(rev.is_number_integer() && rev.get<long long>() >= 0)) {
    throw schema_error("/revision", "expected non-negative integer");
  }
  g.revision = rev.get<std::uint64_t>();
  return g;
}

json to_json(const Observation& obs) {
  json objects = json::array();
  for (const auto& v : obs.visible_objects) {
    json aff = json::array();
    for (auto a : v.affordances) aff.push_back(to_string(a));
    json rels = json::array();
    for (const auto& r : v.relations) rels.push_back(to_json(r));
    json o = {{"id", v.id}, {"category", v.category}, {"name", v.name}, {"affordances", aff},
              {"states", json(v.states)}, {"relations", rels}};
    if (v.color) o["color"] = *v.color;
    objects.push_back(std::move(o));
  }
  json doors = json::array();
  for (const auto& d : obs.doors) {
    json j = {{"door", d.door_id}, {"open", d.open}, {"locked", d.locked}, {"destination", d.destination}};
    if (d.lock) j["lock"] = *d.lock == LockMechanism::key ? "key" : "code";
    if (d.code_length) j["code_length"] = *d.code_length;
    doors.push_back(std::move(j));
  }
  json clues = json::array();
  for (const auto& c : obs.read_clues) {
    json j = {{"object", c.object_id}, {"text", c.text}};
    if (c.referent) j["referent"] = *c.referent;
    if (c.payload) j["payload"] = *c.payload;
    clues.push_back(std::move(j));
  }
  return {{"agent", obs.agent_id},       {"room", obs.room_id}, {"visible_objects", objects},
          {"held", obs.held},            {"doors", doors},      {"read_clues", clues},
          {"co_located_agents", obs.co_located_agents}};
}

bool graph_equal(const SceneGraph& a, const SceneGraph& b, bool compare_revision) {
  if (compare_revision && a.revision != b.revision) return false;
  return a.rooms == b.rooms && a.objects == b.objects && a.agents == b.agents && a.relations == b.relations;
}

}  // namespace vsim
