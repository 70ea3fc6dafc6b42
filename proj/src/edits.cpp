#include "vsim/edits.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "json_util.hpp"
#include "vsim/error.hpp"

namespace vsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

RelationKind location_kind(const json& doc, const std::string& path) {
  auto k = parse_relation_kind(detail::get_string(doc, "relation", path));
  if (!k || *k == RelationKind::connects) throw schema_error(path + "/relation", "expected in_room|inside|on_top|held_by");
  return *k;
}

std::string rel_text(RelationKind k, const std::string& src, const std::string& dst) {
  return std::string(to_string(k)) + "(" + src + "," + dst + ")";
}

std::string parent_text(const SceneGraph& g, const std::string& id) {
  if (!g.contains(id)) return "absent";
  if (g.agents.count(id)) return "in_room(" + id + "," + g.room_of(id) + ")";
  auto p = g.parent_of(id);
  return p ? rel_text(p->kind, p->src, p->dst) : "no location";
}

void drop_held(SceneGraph& g, const std::string& id) {
  if (auto p = g.parent_of(id); p && p->kind == RelationKind::held_by) {
    if (AgentNode* a = g.agent(p->dst)) {
      a->holding.erase(std::remove(a->holding.begin(), a->holding.end(), id), a->holding.end());
    }
  }
}

void check_references(const SceneGraph& g, const ObjectNode& o) {
  if (o.lock && o.lock->key_id && !g.object(*o.lock->key_id)) {
    throw Error(ErrorCode::DanglingReference, "lock key '" + *o.lock->key_id + "' unknown");
  }
  if (o.clue && o.clue->referent && !g.contains(*o.clue->referent)) {
    throw Error(ErrorCode::DanglingReference, "clue referent '" + *o.clue->referent + "' unknown");
  }
}

void require_valid(const SceneGraph& g) {
  auto v = check_invariants(g);
  if (!v.empty()) throw Error(ErrorCode::InvariantViolation, v.front().kind + ": " + v.front().detail);
}

const std::string& subject(const Edit& e) {
  return std::visit(overloaded{
                        [](const edit::Add& a) -> const std::string& { return a.object.id; },
                        [](const auto& x) -> const std::string& { return x.id; },
                    },
                    e);
}

bool same_attributes(const ObjectNode& a, const ObjectNode& b) {
  return a.category == b.category && a.display_name == b.display_name && a.affordances == b.affordances &&
         a.clue == b.clue && a.lock == b.lock && a.color == b.color && a.arrangement == b.arrangement;
}

}  // namespace

// ---------------------------------------------------------------------------
// Wire form

json to_json(const Edit& e) {
  return std::visit(overloaded{
                        [](const edit::Add& a) -> json {
                          return {{"op", "add"},
                                  {"object", to_json(a.object)},
                                  {"relation", to_string(a.relation)},
                                  {"target", a.target}};
                        },
                        [](const edit::Remove& r) -> json { return {{"op", "remove"}, {"id", r.id}}; },
                        [](const edit::Replace& r) -> json {
                          return {{"op", "replace"}, {"id", r.id}, {"object", to_json(r.object)}};
                        },
                        [](const edit::Move& m) -> json {
                          return {{"op", "move"}, {"id", m.id}, {"relation", to_string(m.relation)}, {"target", m.target}};
                        },
                        [](const edit::SetState& s) -> json {
                          return {{"op", "set_state"}, {"id", s.id}, {"state", s.state}, {"value", s.value}};
                        },
                    },
                    e);
}

Edit edit_from_json(const json& doc, const std::string& path) {
  if (!doc.is_object()) throw schema_error(path, "expected edit object");
  if (!doc.contains("op") || !doc.at("op").is_string()) throw schema_error(path + "/op", "missing op");
  const std::string op = doc.at("op").get<std::string>();
  if (op == "add") {
    detail::check_keys(doc, path, {"op", "object", "relation", "target"}, {});
    return edit::Add{object_from_json(doc.at("object"), path + "/object"), location_kind(doc, path),
                     detail::get_id(doc, "target", path)};
  }
  if (op == "remove") {
    detail::check_keys(doc, path, {"op", "id"}, {});
    return edit::Remove{detail::get_id(doc, "id", path)};
  }
  if (op == "replace") {
    detail::check_keys(doc, path, {"op", "id", "object"}, {});
    edit::Replace r{detail::get_id(doc, "id", path), {}};
    json obj = doc.at("object");
    if (obj.is_object() && !obj.contains("id")) obj["id"] = r.id;
    r.object = object_from_json(obj, path + "/object");
    if (r.object.id != r.id) throw schema_error(path + "/object/id", "replace cannot change the id");
    return r;
  }
  if (op == "move") {
    detail::check_keys(doc, path, {"op", "id", "relation", "target"}, {});
    return edit::Move{detail::get_id(doc, "id", path), location_kind(doc, path), detail::get_id(doc, "target", path)};
  }
  if (op == "set_state") {
    detail::check_keys(doc, path, {"op", "id", "state", "value"}, {});
    return edit::SetState{detail::get_id(doc, "id", path), detail::get_string(doc, "state", path),
                          detail::get_bool(doc, "value", path)};
  }
  throw schema_error(path + "/op", "unknown op '" + op + "'");
}

EditList edit_list_from_json(const json& doc) {
  const json* items = &doc;
  std::string base;
  if (doc.is_object()) {
    detail::check_keys(doc, "", {"edits"}, {"schema_version", "viewpoint"});
    if (doc.contains("schema_version") && doc.at("schema_version") != "1") {
      throw schema_error("/schema_version", "unsupported schema version");
    }
    items = &doc.at("edits");
    base = "/edits";
  }
  if (!items->is_array()) throw schema_error(base.empty() ? "/" : base, "expected array of edits");
  EditList out;
  for (std::size_t i = 0; i < items->size(); ++i) out.push_back(edit_from_json((*items)[i], base + "/" + std::to_string(i)));
  return out;
}

json to_json(const EditList& edits) {
  json arr = json::array();
  for (const auto& e : edits) arr.push_back(to_json(e));
  return {{"schema_version", "1"}, {"edits", arr}};
}

std::vector<std::string> edit_ids(const Edit& e) {
  return std::visit(overloaded{
                        [](const edit::Add& a) { return std::vector<std::string>{a.object.id, a.target}; },
                        [](const edit::Move& m) { return std::vector<std::string>{m.id, m.target}; },
                        [](const auto& x) { return std::vector<std::string>{x.id}; },
                    },
                    e);
}

// ---------------------------------------------------------------------------
// Application

void apply_edit(SceneGraph& graph, const Edit& e) {
  SceneGraph g = graph;
  std::visit(overloaded{
                 [&](const edit::Add& a) {
                   g = add_node(std::move(g), a.object, Relation{a.relation, a.object.id, a.target});
                 },
                 [&](const edit::Remove& r) { g = remove_node(std::move(g), r.id); },
                 [&](const edit::Replace& r) {
                   ObjectNode* o = g.object(r.id);
                   if (!o) throw Error(ErrorCode::UnknownId, "unknown object '" + r.id + "'");
                   check_references(g, r.object);
                   *o = r.object;
                   o->id = r.id;
                   require_valid(g);
                   g.touch();
                 },
                 [&](const edit::Move& m) {
                   const bool is_agent = g.agents.count(m.id) != 0;
                   if (!is_agent && !g.object(m.id)) throw Error(ErrorCode::UnknownId, "unknown id '" + m.id + "'");
                   if (!g.contains(m.target)) throw Error(ErrorCode::DanglingReference, "target '" + m.target + "' unknown");
                   if (is_agent && m.relation != RelationKind::in_room) {
                     throw Error(ErrorCode::InvariantViolation, "agents move with in_room only");
                   }
                   drop_held(g, m.id);
                   g.set_location({m.relation, m.id, m.target});
                   if (m.relation == RelationKind::held_by) {
                     if (AgentNode* a = g.agent(m.target)) {
                       a->holding.push_back(m.id);
                       std::sort(a->holding.begin(), a->holding.end());
                     }
                   }
                   require_valid(g);
                   g.touch();
                 },
                 [&](const edit::SetState& s) {
                   ObjectNode* o = g.object(s.id);
                   if (!o) throw Error(ErrorCode::UnknownId, "unknown object '" + s.id + "'");
                   o->states[s.state] = s.value;
                   require_valid(g);
                   g.touch();
                 },
             },
             e);
  graph = std::move(g);
}

EditResult apply_edits(SceneGraph graph, const EditList& edits) {
  EditResult result;
  for (const auto& e : edits) {
    EditVerdict v;
    try {
      apply_edit(graph, e);
      v.applied = true;
    } catch (const Error& err) {
      v.error = std::string(to_string(err.code()));
      v.reason = err.message();
    }
    result.verdicts.push_back(std::move(v));
  }
  result.graph = std::move(graph);
  return result;
}

// ---------------------------------------------------------------------------
// Diff

EditList diff(const SceneGraph& before, const SceneGraph& after) {
  std::vector<Edit> candidates;
  std::set<std::string> known;
  for (const auto& [id, o] : before.objects) known.insert(id);
  for (const auto& [id, r] : before.rooms) known.insert(id);
  for (const auto& [id, a] : before.agents) known.insert(id);

  std::set<std::string> pending;
  for (const auto& [id, o] : after.objects) {
    if (!before.objects.count(id)) pending.insert(id);
  }
  std::set<std::string> deferred;
  while (!pending.empty()) {
    std::string pick;
    for (const auto& id : pending) {
      auto p = after.parent_of(id);
      if (!p || !pending.count(p->dst)) {
        pick = id;
        break;
      }
    }
    if (pick.empty()) pick = *pending.begin();
    pending.erase(pick);
    ObjectNode node = after.objects.at(pick);
    if (node.lock && node.lock->key_id && !known.count(*node.lock->key_id)) {
      node.lock.reset();
      deferred.insert(pick);
    }
    if (node.clue && node.clue->referent && !known.count(*node.clue->referent)) {
      node.clue.reset();
      deferred.insert(pick);
    }
    auto p = after.parent_of(pick);
    candidates.push_back(edit::Add{node, p ? p->kind : RelationKind::in_room, p ? p->dst : std::string{}});
    known.insert(pick);
  }

  std::set<std::string> replaced;
  for (const auto& [id, o] : after.objects) {
    auto it = before.objects.find(id);
    bool replace = deferred.count(id) != 0;
    if (it != before.objects.end()) {
      bool states_dropped = std::any_of(it->second.states.begin(), it->second.states.end(),
                                        [&](const auto& kv) { return !o.states.count(kv.first); });
      replace = replace || !same_attributes(it->second, o) || states_dropped;
    }
    if (replace) {
      candidates.push_back(edit::Replace{id, o});
      replaced.insert(id);
    }
  }

  std::set<std::string> movers;
  for (const auto& [id, o] : after.objects) {
    if (before.objects.count(id)) movers.insert(id);
  }
  for (const auto& [id, a] : after.agents) {
    if (before.agents.count(id)) movers.insert(id);
  }
  for (const auto& id : movers) {
    auto pb = before.parent_of(id);
    auto pa = after.parent_of(id);
    if (pa && pb != pa) candidates.push_back(edit::Move{id, pa->kind, pa->dst});
  }

  for (const auto& [id, o] : after.objects) {
    auto it = before.objects.find(id);
    if (it == before.objects.end() || replaced.count(id)) continue;
    for (const auto& [key, value] : o.states) {
      auto bs = it->second.states.find(key);
      if (bs == it->second.states.end() || bs->second != value) candidates.push_back(edit::SetState{id, key, value});
    }
  }

  for (const auto& [id, o] : before.objects) {
    if (!after.objects.count(id)) candidates.push_back(edit::Remove{id});
  }

  // Replay in order; anything that does not apply yet is retried after the
  // rest, until a pass makes no progress.
  SceneGraph sim = before;
  EditList out;
  std::deque<Edit> queue(candidates.begin(), candidates.end());
  while (!queue.empty()) {
    std::deque<Edit> retry;
    for (auto& e : queue) {
      try {
        apply_edit(sim, e);
        out.push_back(std::move(e));
      } catch (const Error&) {
        retry.push_back(std::move(e));
      }
    }
    if (retry.size() == queue.size()) {
      for (auto& e : retry) out.push_back(std::move(e));
      break;
    }
    queue = std::move(retry);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interpretation check

namespace {

struct Expectation {
  std::string text;
  bool graph_ok = false;
  std::string graph_observed;
};

Expectation expect(const SceneGraph& g, const Edit& e) {
  Expectation x;
  std::visit(overloaded{
                 [&](const edit::Add& a) {
                   x.text = rel_text(a.relation, a.object.id, a.target);
                   const ObjectNode* o = g.object(a.object.id);
                   auto p = g.parent_of(a.object.id);
                   x.graph_ok = o && o->category == a.object.category && p &&
                                *p == Relation{a.relation, a.object.id, a.target};
                   x.graph_observed = parent_text(g, a.object.id);
                 },
                 [&](const edit::Remove& r) {
                   x.text = "absent(" + r.id + ")";
                   x.graph_ok = !g.contains(r.id);
                   x.graph_observed = x.graph_ok ? "absent" : "present";
                 },
                 [&](const edit::Replace& r) {
                   x.text = "replaced(" + r.id + "," + r.object.category + ")";
                   const ObjectNode* o = g.object(r.id);
                   x.graph_ok = o && same_attributes(*o, r.object) && o->states == r.object.states;
                   x.graph_observed = o ? "category " + o->category : "absent";
                 },
                 [&](const edit::Move& m) {
                   x.text = rel_text(m.relation, m.id, m.target);
                   if (g.agents.count(m.id)) {
                     x.graph_ok = g.room_of(m.id) == m.target;
                   } else {
                     auto p = g.parent_of(m.id);
                     x.graph_ok = p && *p == Relation{m.relation, m.id, m.target};
                   }
                   x.graph_observed = parent_text(g, m.id);
                 },
                 [&](const edit::SetState& s) {
                   x.text = "state(" + s.id + "," + s.state + "=" + (s.value ? "true" : "false") + ")";
                   const ObjectNode* o = g.object(s.id);
                   auto it = o ? o->states.find(s.state) : decltype(o->states.end()){};
                   x.graph_ok = o && it != o->states.end() && it->second == s.value;
                   x.graph_observed = !o ? "absent" : it == o->states.end() ? "unset" : (it->second ? "true" : "false");
                 },
             },
             e);
  return x;
}

// nullopt: occluded from the view. Otherwise (holds, observed).
std::optional<std::pair<bool, std::string>> view_side(const SceneGraph& g, const Observation& view, const Edit& e) {
  const std::string& id = subject(e);
  if (const auto* r = std::get_if<edit::Remove>(&e)) {
    const bool seen = view.find(r->id) != nullptr;
    return std::make_pair(!seen, std::string(seen ? "present in view" : "absent"));
  }
  if (g.agents.count(id)) {
    const auto* m = std::get_if<edit::Move>(&e);
    if (!m) return std::nullopt;
    if (view.agent_id == id) return std::make_pair(view.room_id == m->target, "in_room(" + id + "," + view.room_id + ")");
    const bool colocated = std::find(view.co_located_agents.begin(), view.co_located_agents.end(), id) !=
                           view.co_located_agents.end();
    if (m->target == view.room_id) return std::make_pair(colocated, std::string(colocated ? "present" : "absent from view"));
    return std::nullopt;
  }
  const VisibleObject* v = view.find(id);
  const bool expect_visible = access_from(g, view.room_id, view.agent_id, id) == Access::ok;
  if (!expect_visible) {
    if (v) return std::make_pair(false, std::string("visible although hidden in graph"));
    return std::nullopt;
  }
  if (!v) return std::make_pair(false, std::string("absent from view"));
  auto has_rel = [&](RelationKind k, const std::string& target) {
    return std::find(v->relations.begin(), v->relations.end(), Relation{k, id, target}) != v->relations.end();
  };
  auto observed_parent = [&]() {
    for (const auto& rel : v->relations) {
      if (is_location_kind(rel.kind)) return rel_text(rel.kind, rel.src, rel.dst);
    }
    return std::string("no location");
  };
  return std::visit(overloaded{
                        [&](const edit::Add& a) -> std::optional<std::pair<bool, std::string>> {
                          return std::make_pair(has_rel(a.relation, a.target) && v->category == a.object.category,
                                                observed_parent());
                        },
                        [&](const edit::Move& m) -> std::optional<std::pair<bool, std::string>> {
                          return std::make_pair(has_rel(m.relation, m.target), observed_parent());
                        },
                        [&](const edit::Replace& r) -> std::optional<std::pair<bool, std::string>> {
                          return std::make_pair(v->category == r.object.category && v->name == r.object.display_name,
                                                "category " + v->category);
                        },
                        [&](const edit::SetState& s) -> std::optional<std::pair<bool, std::string>> {
                          auto it = v->states.find(s.state);
                          const bool ok = it != v->states.end() && it->second == s.value;
                          return std::make_pair(ok, std::string(it == v->states.end() ? "unset"
                                                                : it->second            ? "true"
                                                                                        : "false"));
                        },
                        [&](const edit::Remove&) -> std::optional<std::pair<bool, std::string>> { return std::nullopt; },
                    },
                    e);
}

}  // namespace

CheckReport interpretation_check(const SceneGraph& graph, const EditList& edits, const Observation& view,
                                 const std::vector<EditVerdict>& verdicts) {
  CheckReport report;
  report.verdicts = verdicts;
  for (std::size_t i = 0; i < edits.size(); ++i) {
    if (i < verdicts.size() && !verdicts[i].applied) {
      report.passed = false;
      continue;
    }
    const std::string& subj = subject(edits[i]);
    bool superseded = false;
    for (std::size_t j = i + 1; j < edits.size() && !superseded; ++j) {
      if (j < verdicts.size() && !verdicts[j].applied) continue;
      const auto ids = edit_ids(edits[i]);
      superseded = std::find(ids.begin(), ids.end(), subject(edits[j])) != ids.end() ||
                   (std::holds_alternative<edit::Remove>(edits[j]) && subject(edits[j]) == subj);
    }
    const int index = static_cast<int>(i);
    if (superseded) {
      report.annotations.emplace_back(index, "superseded");
      continue;
    }
    Expectation x = expect(graph, edits[i]);
    if (!x.graph_ok) report.mismatches.push_back({index, x.text, x.graph_observed, "graph"});
    auto v = view_side(graph, view, edits[i]);
    if (!v) {
      report.annotations.emplace_back(index, "occluded");
    } else if (!v->first) {
      report.mismatches.push_back({index, x.text, v->second, "view"});
    }
  }
  if (!report.mismatches.empty()) report.passed = false;
  return report;
}

CheckReport interpretation_check(const SceneGraph& graph, const EditList& edits, const std::string& viewpoint,
                                 const std::vector<EditVerdict>& verdicts) {
  Observation view;
  if (graph.agents.count(viewpoint)) {
    view = observe(graph, viewpoint);
  } else if (graph.is_room(viewpoint)) {
    view = observe_room(graph, viewpoint);
  } else {
    throw Error(ErrorCode::UnknownViewpoint, "viewpoint '" + viewpoint + "' is neither an agent nor a room");
  }
  return interpretation_check(graph, edits, view, verdicts);
}

json to_json(const EditVerdict& v) {
  json j = {{"status", v.applied ? "applied" : "failed"}};
  if (!v.applied) {
    j["error"] = v.error;
    j["reason"] = v.reason;
  }
  return j;
}

json to_json(const CheckReport& r) {
  json verdicts = json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(to_json(v));
  json mismatches = json::array();
  for (const auto& m : r.mismatches) {
    mismatches.push_back({{"edit", m.edit}, {"expected", m.expected}, {"observed", m.observed}, {"source", m.source}});
  }
  json annotations = json::array();
  for (const auto& [i, note] : r.annotations) annotations.push_back({{"edit", i}, {"view", note}});
  return {{"verdicts", verdicts}, {"mismatches", mismatches}, {"annotations", annotations}, {"passed", r.passed}};
}

}  // namespace vsim
