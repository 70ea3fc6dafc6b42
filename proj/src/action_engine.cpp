#include "vsim/action_engine.hpp"

#include <algorithm>
#include <set>

#include "vsim/error.hpp"
#include "vsim/knowledge.hpp"

namespace vsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using Check = std::optional<PreconditionError>;

Check fail(PreconditionCode code, std::string detail) { return PreconditionError{code, std::move(detail)}; }

struct Ctx {
  const SceneGraph& g;
  const AgentNode& agent;
  std::string room;
};

Check reach(const Ctx& c, const std::string& id) {
  switch (access_from(c.g, c.room, c.agent.id, id)) {
    case Access::ok: return std::nullopt;
    case Access::unknown: return fail(PreconditionCode::unknown_object, "no perceivable object '" + id + "'");
    case Access::wrong_room: return fail(PreconditionCode::wrong_room, "'" + id + "' is not in " + c.room);
    case Access::closed_container: return fail(PreconditionCode::closed_container, "'" + id + "' is inside a closed container");
  }
  return std::nullopt;
}

bool holds(const AgentNode& a, const std::string& id) {
  return std::binary_search(a.holding.begin(), a.holding.end(), id);
}

Check need(const ObjectNode& o, Affordance a) {
  if (o.has(a)) return std::nullopt;
  return fail(PreconditionCode::not_affordant, "'" + o.id + "' is not " + std::string(to_string(a)));
}

bool is_ancestor(const SceneGraph& g, const std::string& maybe_ancestor, std::string id) {
  for (std::size_t steps = 0; steps <= g.objects.size(); ++steps) {
    auto p = g.parent_of(id);
    if (!p || (p->kind != RelationKind::inside && p->kind != RelationKind::on_top)) return false;
    if (p->dst == maybe_ancestor) return true;
    id = p->dst;
  }
  return false;
}

Check check(const Ctx& c, const act::GoTo& a) {
  if (!c.g.is_room(a.room)) return fail(PreconditionCode::unknown_object, "no room '" + a.room + "'");
  if (a.room == c.room) return fail(PreconditionCode::invalid_target, "already in " + a.room);
  bool any = false;
  bool all_locked = true;
  for (const auto& door : c.g.doors_of_room(c.room)) {
    auto rooms = c.g.door_rooms(door);
    if (std::find(rooms.begin(), rooms.end(), a.room) == rooms.end()) continue;
    const ObjectNode* d = c.g.object(door);
    if (!d || !d->is_revealed()) continue;
    any = true;
    if (d->is_open() && !d->is_locked()) return std::nullopt;
    all_locked = all_locked && d->is_locked();
  }
  if (!any) return fail(PreconditionCode::invalid_target, a.room + " is not adjacent to " + c.room);
  if (all_locked) return fail(PreconditionCode::locked, "door to " + a.room + " is locked");
  return fail(PreconditionCode::closed_container, "door to " + a.room + " is closed");
}

Check check(const Ctx& c, const act::Open& a) {
  if (auto e = reach(c, a.object)) return e;
  const ObjectNode& o = *c.g.object(a.object);
  if (auto e = need(o, Affordance::openable)) return e;
  if (o.is_open()) return fail(PreconditionCode::invalid_target, "'" + a.object + "' is already open");
  if (o.is_locked()) return fail(PreconditionCode::locked, "'" + a.object + "' is locked");
  return std::nullopt;
}

Check check(const Ctx& c, const act::Close& a) {
  if (auto e = reach(c, a.object)) return e;
  const ObjectNode& o = *c.g.object(a.object);
  if (auto e = need(o, Affordance::openable)) return e;
  if (!o.is_open()) return fail(PreconditionCode::invalid_target, "'" + a.object + "' is already closed");
  return std::nullopt;
}

Check check(const Ctx& c, const act::PickUp& a) {
  if (auto e = reach(c, a.object)) return e;
  if (holds(c.agent, a.object)) return fail(PreconditionCode::invalid_target, "already holding '" + a.object + "'");
  const ObjectNode& o = *c.g.object(a.object);
  if (auto e = need(o, Affordance::graspable)) return e;
  if (static_cast<int>(c.agent.holding.size()) >= c.agent.capacity) {
    return fail(PreconditionCode::hands_full, "carrying capacity reached");
  }
  return std::nullopt;
}

Check check(const Ctx& c, const act::Place& a) {
  if (!c.g.object(a.object)) return fail(PreconditionCode::unknown_object, "no object '" + a.object + "'");
  if (!holds(c.agent, a.object)) return fail(PreconditionCode::not_held, "not holding '" + a.object + "'");
  if (auto e = reach(c, a.target)) return e;
  if (a.target == a.object || is_ancestor(c.g, a.object, a.target)) {
    return fail(PreconditionCode::invalid_target, "cannot place '" + a.object + "' into itself");
  }
  const ObjectNode& t = *c.g.object(a.target);
  if (a.relation == act::PlaceRelation::inside) {
    if (auto e = need(t, Affordance::container)) return e;
    if (!t.is_open()) return fail(PreconditionCode::closed_container, "'" + a.target + "' is closed");
  } else {
    if (auto e = need(t, Affordance::surface)) return e;
  }
  return std::nullopt;
}

Check check(const Ctx& c, const act::Unlock& a) {
  if (auto e = reach(c, a.object)) return e;
  const ObjectNode& o = *c.g.object(a.object);
  if (auto e = need(o, Affordance::lockable)) return e;
  if (!o.lock) return fail(PreconditionCode::not_affordant, "'" + a.object + "' has no lock mechanism");
  if (!o.is_locked()) return fail(PreconditionCode::invalid_target, "'" + a.object + "' is not locked");
  if (o.lock->mechanism == LockMechanism::key) {
    if (!a.key) return fail(PreconditionCode::wrong_key, "'" + a.object + "' needs a key, not a code");
    if (!c.g.object(*a.key)) return fail(PreconditionCode::unknown_object, "no object '" + *a.key + "'");
    if (!holds(c.agent, *a.key)) return fail(PreconditionCode::not_held, "not holding '" + *a.key + "'");
    if (o.lock->key_id != *a.key) return fail(PreconditionCode::wrong_key, "'" + *a.key + "' does not fit");
  } else {
    if (!a.code) return fail(PreconditionCode::wrong_code, "'" + a.object + "' needs a code, not a key");
    if (o.lock->code != *a.code) return fail(PreconditionCode::wrong_code, "code rejected");
  }
  return std::nullopt;
}

Check check(const Ctx& c, const act::Lock& a) {
  if (auto e = reach(c, a.object)) return e;
  const ObjectNode& o = *c.g.object(a.object);
  if (auto e = need(o, Affordance::lockable)) return e;
  if (o.is_locked()) return fail(PreconditionCode::invalid_target, "'" + a.object + "' is already locked");
  if (o.has(Affordance::openable) && o.is_open()) {
    return fail(PreconditionCode::invalid_target, "'" + a.object + "' must be closed first");
  }
  return std::nullopt;
}

Check check(const Ctx& c, const act::Read& a) {
  if (auto e = reach(c, a.object)) return e;
  const ObjectNode& o = *c.g.object(a.object);
  if (auto e = need(o, Affordance::readable)) return e;
  if (!o.clue) return fail(PreconditionCode::not_affordant, "'" + a.object + "' carries no text");
  return std::nullopt;
}

Check check(const Ctx& c, const act::Toggle& a) {
  if (auto e = reach(c, a.object)) return e;
  return need(*c.g.object(a.object), Affordance::toggleable);
}

Check check(const Ctx& c, const act::Arrange& a) {
  std::set<std::string> unique(a.objects.begin(), a.objects.end());
  if (a.objects.empty() || unique.size() != a.objects.size()) {
    return fail(PreconditionCode::invalid_target, "arrange needs distinct objects");
  }
  for (const auto& id : a.objects) {
    if (auto e = reach(c, id)) return e;
    if (holds(c.agent, id)) return fail(PreconditionCode::invalid_target, "put '" + id + "' down first");
    const ObjectNode& o = *c.g.object(id);
    if (auto e = need(o, Affordance::movable)) return e;
    if (!o.color) return fail(PreconditionCode::not_affordant, "'" + id + "' has no colour");
  }
  if (auto e = reach(c, a.target)) return e;
  if (unique.count(a.target)) return fail(PreconditionCode::invalid_target, "target is among the objects");
  const ObjectNode& t = *c.g.object(a.target);
  if (auto e = need(t, Affordance::surface)) return e;
  if (!t.arrangement) return fail(PreconditionCode::not_affordant, "'" + a.target + "' takes no arrangement");
  if (t.arrangement->order.size() != a.objects.size()) {
    return fail(PreconditionCode::invalid_target, "arrangement needs " +
                                                      std::to_string(t.arrangement->order.size()) + " objects");
  }
  return std::nullopt;
}

Check check(const Ctx&, const act::Wait&) { return std::nullopt; }

const AgentNode& require_agent(const SceneGraph& g, const std::string& agent_id) {
  const AgentNode* a = g.agent(agent_id);
  if (!a) throw Error(ErrorCode::UnknownAgent, "unknown agent '" + agent_id + "'");
  return *a;
}

void drop_from_holding(AgentNode& a, const std::string& id) {
  a.holding.erase(std::remove(a.holding.begin(), a.holding.end(), id), a.holding.end());
}

std::vector<Event> effect(SceneGraph& g, const std::string& agent_id, const Action& action) {
  std::vector<Event> events;
  AgentNode& agent = *g.agent(agent_id);
  std::visit(overloaded{
                 [&](const act::GoTo& a) {
                   g.set_location({RelationKind::in_room, agent_id, a.room});
                   events.push_back({EventKind::moved, a.room, std::nullopt});
                 },
                 [&](const act::Open& a) {
                   g.object(a.object)->states[std::string(state::open)] = true;
                   events.push_back({EventKind::opened, a.object, std::nullopt});
                 },
                 [&](const act::Close& a) {
                   g.object(a.object)->states[std::string(state::open)] = false;
                   events.push_back({EventKind::closed, a.object, std::nullopt});
                 },
                 [&](const act::PickUp& a) {
                   g.set_location({RelationKind::held_by, a.object, agent_id});
                   agent.holding.push_back(a.object);
                   std::sort(agent.holding.begin(), agent.holding.end());
                   events.push_back({EventKind::picked_up, a.object, std::nullopt});
                 },
                 [&](const act::Place& a) {
                   drop_from_holding(agent, a.object);
                   g.set_location({a.relation == act::PlaceRelation::inside ? RelationKind::inside : RelationKind::on_top,
                                   a.object, a.target});
                   events.push_back({EventKind::placed, a.object, std::nullopt});
                 },
                 [&](const act::Unlock& a) {
                   g.object(a.object)->states[std::string(state::locked)] = false;
                   events.push_back({EventKind::unlocked, a.object, std::nullopt});
                 },
                 [&](const act::Lock& a) {
                   g.object(a.object)->states[std::string(state::locked)] = true;
                   events.push_back({EventKind::locked, a.object, std::nullopt});
                 },
                 [&](const act::Read& a) {
                   const ClueText& clue = *g.object(a.object)->clue;
                   if (!agent.has_read(a.object)) agent.read_clues.push_back({a.object, clue});
                   events.push_back({EventKind::clue_read, a.object, clue});
                 },
                 [&](const act::Toggle& a) {
                   ObjectNode& o = *g.object(a.object);
                   o.states[std::string(state::on)] = !o.state_or(state::on, false);
                   events.push_back({EventKind::toggled, a.object, std::nullopt});
                 },
                 [&](const act::Arrange& a) {
                   std::vector<std::string> colours;
                   for (const auto& id : a.objects) {
                     g.set_location({RelationKind::on_top, id, a.target});
                     colours.push_back(*g.object(id)->color);
                   }
                   events.push_back({EventKind::arranged, a.target, std::nullopt});
                   const ArrangementSpec& spec = *g.object(a.target)->arrangement;
                   if (colours == spec.order) {
                     ObjectNode* hidden = g.object(spec.reveals);
                     if (hidden && !hidden->is_revealed()) {
                       hidden->states[std::string(state::revealed)] = true;
                       events.push_back({EventKind::revealed, spec.reveals, std::nullopt});
                     }
                   }
                 },
                 [&](const act::Wait&) {},
             },
             action);
  if (!std::holds_alternative<act::Wait>(action)) g.touch();
  return events;
}

// All k-permutations of `items` (sorted input gives lexicographic output).
void k_permutations(const std::vector<std::string>& items, std::size_t k, std::vector<std::string>& cur,
                    std::vector<bool>& used, std::vector<std::vector<std::string>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    cur.push_back(items[i]);
    k_permutations(items, k, cur, used, out);
    cur.pop_back();
    used[i] = false;
  }
}

}  // namespace

std::optional<PreconditionError> validate(const SceneGraph& graph, const std::string& agent_id, const Action& action) {
  const AgentNode& agent = require_agent(graph, agent_id);
  Ctx ctx{graph, agent, graph.room_of(agent_id)};
  return std::visit([&](const auto& a) { return check(ctx, a); }, action);
}

Outcome apply_in_place(SceneGraph& graph, const std::string& agent_id, const Action& action) {
  Outcome out;
  if (auto err = validate(graph, agent_id, action)) {
    out.ok = false;
    out.reason = std::move(err);
    return out;
  }
  out.events = effect(graph, agent_id, action);
  return out;
}

ApplyResult apply(SceneGraph graph, const std::string& agent_id, const Action& action) {
  Outcome o = apply_in_place(graph, agent_id, action);
  return {std::move(graph), std::move(o)};
}

std::vector<Action> candidate_actions(const SceneGraph& g, const std::string& agent_id, bool whole_graph) {
  const AgentNode& agent = require_agent(g, agent_id);
  const std::string room = g.room_of(agent_id);

  std::vector<std::string> rooms;
  if (whole_graph) {
    for (const auto& [id, r] : g.rooms) {
      (void)r;
      rooms.push_back(id);
    }
  } else {
    std::set<std::string> adjacent;
    for (const auto& door : g.doors_of_room(room)) {
      for (const auto& r : g.door_rooms(door)) {
        if (r != room) adjacent.insert(r);
      }
    }
    rooms.assign(adjacent.begin(), adjacent.end());
  }

  std::vector<const ObjectNode*> objs;
  for (const auto& [id, o] : g.objects) {
    if (whole_graph || access_from(g, room, agent_id, id) == Access::ok) objs.push_back(&o);
  }
  std::vector<std::string> held = agent.holding;
  if (whole_graph) {
    held.clear();
    for (const auto* o : objs) held.push_back(o->id);
  }

  std::vector<Action> out;
  for (const auto& r : rooms) out.push_back(act::GoTo{r});
  for (const auto* o : objs) {
    if (whole_graph || o->has(Affordance::openable)) out.push_back(act::Open{o->id});
  }
  for (const auto* o : objs) {
    if (whole_graph || o->has(Affordance::openable)) out.push_back(act::Close{o->id});
  }
  for (const auto* o : objs) {
    if (whole_graph || o->has(Affordance::graspable)) out.push_back(act::PickUp{o->id});
  }
  for (const auto& h : held) {
    for (const auto* t : objs) {
      if (t->id == h) continue;
      if (whole_graph || t->has(Affordance::container)) {
        out.push_back(act::Place{h, act::PlaceRelation::inside, t->id});
      }
      if (whole_graph || t->has(Affordance::surface)) {
        out.push_back(act::Place{h, act::PlaceRelation::on_top, t->id});
      }
    }
  }
  const auto codes = derive_knowledge(g, agent_id).codes();
  for (const auto* o : objs) {
    if (!whole_graph && !o->has(Affordance::lockable)) continue;
    for (const auto& k : held) out.push_back(act::Unlock{o->id, k, std::nullopt});
    if (auto it = codes.find(o->id); it != codes.end() && !it->second.empty()) {
      out.push_back(act::Unlock{o->id, std::nullopt, it->second});
    }
  }
  for (const auto* o : objs) {
    if (whole_graph || o->has(Affordance::lockable)) out.push_back(act::Lock{o->id});
  }
  for (const auto* o : objs) {
    if (whole_graph || o->has(Affordance::readable)) out.push_back(act::Read{o->id});
  }
  for (const auto* o : objs) {
    if (whole_graph || o->has(Affordance::toggleable)) out.push_back(act::Toggle{o->id});
  }
  std::vector<std::string> coloured;
  for (const auto* o : objs) {
    if (o->color && o->has(Affordance::movable)) coloured.push_back(o->id);
  }
  for (const auto* t : objs) {
    if (!t->arrangement) continue;
    const std::size_t k = t->arrangement->order.size();
    if (k == 0 || k > coloured.size()) continue;
    std::vector<std::vector<std::string>> perms;
    std::vector<std::string> cur;
    std::vector<bool> used(coloured.size(), false);
    k_permutations(coloured, k, cur, used, perms);
    for (auto& p : perms) out.push_back(act::Arrange{std::move(p), t->id});
  }
  return out;
}

std::vector<Action> legal_actions(const SceneGraph& graph, const std::string& agent_id) {
  std::vector<Action> out;
  for (auto& a : candidate_actions(graph, agent_id, false)) {
    if (!validate(graph, agent_id, a)) out.push_back(std::move(a));
  }
  return out;
}

StepResult step_multi(SceneGraph graph, const std::vector<Move>& moves) {
  std::set<std::string> seen;
  for (const auto& [agent, action] : moves) {
    (void)action;
    if (!seen.insert(agent).second) throw Error(ErrorCode::DuplicateAgent, "agent '" + agent + "' moves twice");
    require_agent(graph, agent);
  }
  StepResult result;
  for (const auto& [agent, action] : moves) result.outcomes.push_back(apply_in_place(graph, agent, action));
  result.graph = std::move(graph);
  return result;
}

}  // namespace vsim
