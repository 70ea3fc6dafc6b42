#include "vsim/goal.hpp"

#include <algorithm>

#include "json_util.hpp"
#include "vsim/error.hpp"

namespace vsim {

namespace {

constexpr std::string_view kPredicateNames[] = {"object_in",   "object_on", "state_is",
                                                "door_open",   "clue_solved", "held_by"};

bool known_state_key(std::string_view s) {
  return s == state::open || s == state::locked || s == state::on || s == state::revealed;
}

bool precedes(const ConjunctHistory& a, const ConjunctHistory& b) {
  if (a.step && b.step) return *a.step < *b.step;
  if (a.tick && b.tick) return *a.tick < *b.tick;
  return false;
}

}  // namespace

std::string_view to_string(PredicateKind k) { return kPredicateNames[static_cast<int>(k)]; }

std::optional<PredicateKind> parse_predicate_kind(std::string_view s) {
  for (int i = 0; i < 6; ++i) {
    if (kPredicateNames[i] == s) return static_cast<PredicateKind>(i);
  }
  return std::nullopt;
}

bool predicate_holds(const SceneGraph& g, const Predicate& p) {
  const ObjectNode* o = g.object(p.object);
  if (!o) return false;
  auto parent = g.parent_of(p.object);
  switch (p.kind) {
    case PredicateKind::object_in:
      if (g.is_room(p.target)) {
        return parent && parent->kind != RelationKind::held_by && g.room_of(p.object) == p.target;
      }
      return parent && parent->kind == RelationKind::inside && parent->dst == p.target;
    case PredicateKind::object_on:
      return parent && parent->kind == RelationKind::on_top && parent->dst == p.target;
    case PredicateKind::state_is:
      return o->state_or(p.state, p.state == state::revealed) == p.value;
    case PredicateKind::door_open:
      return o->state_or(state::open, false);
    case PredicateKind::clue_solved:
      return std::any_of(g.agents.begin(), g.agents.end(),
                         [&](const auto& kv) { return kv.second.has_read(p.object); });
    case PredicateKind::held_by:
      return parent && parent->kind == RelationKind::held_by && (p.target.empty() || parent->dst == p.target);
  }
  return false;
}

bool goal_holds(const SceneGraph& graph, const GoalSpec& goal) {
  return std::all_of(goal.conjuncts.begin(), goal.conjuncts.end(),
                     [&](const Predicate& p) { return predicate_holds(graph, p); });
}

GoalReport goal_check(const SceneGraph& graph, const GoalSpec& goal, const std::vector<ConjunctHistory>& history) {
  GoalReport report;
  const bool have_history = history.size() == goal.conjuncts.size() && !history.empty();
  int passed = 0;
  for (std::size_t i = 0; i < goal.conjuncts.size(); ++i) {
    ConjunctResult r;
    r.holds = predicate_holds(graph, goal.conjuncts[i]);
    if (!r.holds) r.detail = "predicate not satisfied";
    for (const auto& [before, after] : goal.ordering) {
      if (after != static_cast<int>(i)) continue;
      if (!have_history || !precedes(history[before], history[i])) {
        r.ordering_ok = false;
        r.detail = "conjunct " + std::to_string(before) + " was not satisfied first";
      }
    }
    if (auto it = goal.assignments.find(static_cast<int>(i)); it != goal.assignments.end()) {
      if (!have_history || history[i].agent != it->second) {
        r.assignment_ok = false;
        r.detail = "assigned to " + it->second + ", satisfied by " +
                   (have_history && !history[i].agent.empty() ? history[i].agent : std::string("nobody"));
      }
    }
    r.passed = r.holds && r.ordering_ok && r.assignment_ok;
    if (r.passed) ++passed;
    report.conjuncts.push_back(std::move(r));
  }
  report.passed = passed == static_cast<int>(goal.conjuncts.size());
  report.satisfied_fraction =
      goal.conjuncts.empty() ? 1.0 : static_cast<double>(passed) / static_cast<double>(goal.conjuncts.size());
  return report;
}

void check_goal_ordering(const GoalSpec& goal, const std::string& path) {
  const int n = static_cast<int>(goal.conjuncts.size());
  std::vector<std::vector<int>> next(n);
  std::vector<int> indegree(n, 0);
  for (std::size_t k = 0; k < goal.ordering.size(); ++k) {
    auto [a, b] = goal.ordering[k];
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw schema_error(path + "/" + std::to_string(k), "index out of range");
    }
    if (a == b) throw Error(ErrorCode::CycleError, "conjunct " + std::to_string(a) + " ordered before itself", path);
    next[a].push_back(b);
    ++indegree[b];
  }
  std::vector<int> ready;
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  int seen = 0;
  while (!ready.empty()) {
    int v = ready.back();
    ready.pop_back();
    ++seen;
    for (int w : next[v]) {
      if (--indegree[w] == 0) ready.push_back(w);
    }
  }
  if (seen != n) throw Error(ErrorCode::CycleError, "temporal constraints form a cycle", path);
}

json to_json(const Predicate& p) {
  json j = {{"kind", to_string(p.kind)}, {"object", p.object}};
  if (!p.target.empty()) j["target"] = p.target;
  if (p.kind == PredicateKind::state_is) {
    j["state"] = p.state;
    j["value"] = p.value;
  }
  return j;
}

Predicate predicate_from_json(const json& doc, const std::string& path) {
  detail::check_keys(doc, path, {"kind", "object"}, {"target", "state", "value"});
  Predicate p;
  auto kind = parse_predicate_kind(detail::get_string(doc, "kind", path));
  if (!kind) throw schema_error(path + "/kind", "unknown predicate kind");
  p.kind = *kind;
  p.object = detail::get_id(doc, "object", path);
  if (doc.contains("target")) p.target = detail::get_id(doc, "target", path);
  const bool needs_target = p.kind == PredicateKind::object_in || p.kind == PredicateKind::object_on;
  if (needs_target && p.target.empty()) throw schema_error(path + "/target", "missing required key");
  if (p.kind == PredicateKind::state_is) {
    if (!doc.contains("state")) throw schema_error(path + "/state", "missing required key");
    p.state = detail::get_string(doc, "state", path);
    if (!known_state_key(p.state)) throw schema_error(path + "/state", "unknown state key");
    p.value = doc.contains("value") ? detail::get_bool(doc, "value", path) : true;
  } else if (doc.contains("state") || doc.contains("value")) {
    throw schema_error(path + "/state", "only state_is takes a state");
  }
  return p;
}

json to_json(const GoalSpec& goal) {
  json conjuncts = json::array();
  for (const auto& p : goal.conjuncts) conjuncts.push_back(to_json(p));
  json ordering = json::array();
  for (const auto& [a, b] : goal.ordering) ordering.push_back({a, b});
  json assignments = json::object();
  for (const auto& [i, agent] : goal.assignments) assignments[std::to_string(i)] = agent;
  return {{"conjuncts", conjuncts}, {"ordering", ordering}, {"assignments", assignments},
          {"description", goal.description}};
}

GoalSpec goal_from_json(const json& doc, const std::string& path) {
  detail::check_keys(doc, path, {"conjuncts"}, {"ordering", "assignments", "description"});
  GoalSpec goal;
  const auto& conjuncts = detail::get_array(doc, "conjuncts", path);
  for (std::size_t i = 0; i < conjuncts.size(); ++i) {
    goal.conjuncts.push_back(predicate_from_json(conjuncts[i], path + "/conjuncts/" + std::to_string(i)));
  }
  if (doc.contains("ordering")) {
    const auto& ordering = detail::get_array(doc, "ordering", path);
    for (std::size_t i = 0; i < ordering.size(); ++i) {
      const auto& pair = ordering[i];
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
        throw schema_error(path + "/ordering/" + std::to_string(i), "expected [before, after]");
      }
      goal.ordering.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
    check_goal_ordering(goal, path + "/ordering");
  }
  if (doc.contains("assignments")) {
    const auto& a = doc.at("assignments");
    if (!a.is_object()) throw schema_error(path + "/assignments", "expected object");
    for (const auto& [key, value] : a.items()) {
      const std::string at = path + "/assignments/" + key;
      int index = -1;
      try {
        std::size_t used = 0;
        index = std::stoi(key, &used);
        if (used != key.size()) index = -1;
      } catch (const std::exception&) {
        index = -1;
      }
      if (index < 0 || index >= static_cast<int>(goal.conjuncts.size())) throw schema_error(at, "bad conjunct index");
      if (!value.is_string() || !is_valid_identifier(value.get<std::string>())) {
        throw schema_error(at, "expected agent id");
      }
      goal.assignments[index] = value.get<std::string>();
    }
  }
  if (doc.contains("description")) goal.description = detail::get_string(doc, "description", path);
  return goal;
}

json to_json(const GoalReport& report) {
  json conjuncts = json::array();
  for (const auto& c : report.conjuncts) {
    json j = {{"holds", c.holds},
              {"ordering_ok", c.ordering_ok},
              {"assignment_ok", c.assignment_ok},
              {"passed", c.passed}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    conjuncts.push_back(std::move(j));
  }
  return {{"passed", report.passed}, {"conjuncts", conjuncts}, {"satisfied_fraction", report.satisfied_fraction}};
}

json to_json(const ConjunctHistory& h) {
  json j = json::object();
  j["tick"] = h.tick ? json(*h.tick) : json(nullptr);
  j["step"] = h.step ? json(*h.step) : json(nullptr);
  j["agent"] = h.agent;
  return j;
}

}  // namespace vsim
