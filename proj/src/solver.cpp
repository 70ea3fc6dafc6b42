#include "vsim/solver.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_set>

#include "vsim/knowledge.hpp"
#include "vsim/rng.hpp"

namespace vsim {

namespace {

bool subtree_has(const SceneGraph& g, const std::string& id, const std::set<std::string>& wanted, int depth = 0) {
  if (depth > 64) return false;
  for (const auto& child : g.children_of(id)) {
    if (wanted.count(child) || subtree_has(g, child, wanted, depth + 1)) return true;
  }
  return false;
}

struct Digest {
  std::uint64_t a;
  std::uint64_t b;
  bool operator==(const Digest&) const = default;
};

struct DigestHash {
  std::size_t operator()(const Digest& d) const { return static_cast<std::size_t>(d.a ^ (d.b * 0x9E3779B97F4A7C15ULL)); }
};

Digest digest(const SceneGraph& g) {
  const std::string key = canonical_state_key(g);
  return {fnv1a64(key), std::hash<std::string>{}(key)};
}

}  // namespace

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved: return "solved";
    case SolveStatus::unsolvable: return "unsolvable";
    case SolveStatus::budget_exceeded: return "budget_exceeded";
  }
  return "unsolvable";
}

std::string canonical_state_key(const SceneGraph& g) {
  std::string key;
  key.reserve(64 * (g.relations.size() + g.objects.size()));
  for (const auto& r : g.relations) {
    key += static_cast<char>('0' + static_cast<int>(r.kind));
    key += r.src;
    key += '>';
    key += r.dst;
    key += ';';
  }
  key += '#';
  for (const auto& [id, o] : g.objects) {
    if (o.states.empty()) continue;
    key += id;
    key += ':';
    for (const auto& [k, v] : o.states) {
      key += k;
      key += v ? '1' : '0';
    }
    key += ';';
  }
  key += '#';
  for (const auto& [id, a] : g.agents) {
    key += id;
    key += ':';
    std::vector<std::string> read;
    for (const auto& rc : a.read_clues) read.push_back(rc.object_id);
    std::sort(read.begin(), read.end());
    for (const auto& r : read) {
      key += r;
      key += ',';
    }
    key += ';';
  }
  return key;
}

SearchContext make_search_context(const SceneGraph& g, const GoalSpec& goal, const SolveOptions& options) {
  SearchContext ctx;
  ctx.agent = options.agent;
  if (ctx.agent.empty() && !g.agents.empty()) ctx.agent = g.agents.begin()->first;
  for (const auto& p : goal.conjuncts) {
    if (g.object(p.object)) ctx.goal_objects.insert(p.object);
    if (!p.target.empty() && g.object(p.target)) ctx.goal_objects.insert(p.target);
    if (p.kind == PredicateKind::clue_solved) ctx.readable.insert(p.object);
  }
  for (const auto& [id, o] : g.objects) {
    if (o.lock && o.lock->key_id) ctx.lock_keys.insert(*o.lock->key_id);
    if (o.clue && (o.clue->referent || o.clue->payload)) ctx.readable.insert(id);
  }
  if (options.readable_clues) {
    std::set<std::string> kept;
    for (const auto& id : ctx.readable) {
      if (options.readable_clues->count(id)) kept.insert(id);
    }
    ctx.readable = std::move(kept);
  }
  ctx.relevant = ctx.goal_objects;
  ctx.relevant.insert(ctx.lock_keys.begin(), ctx.lock_keys.end());
  ctx.relevant.insert(ctx.readable.begin(), ctx.readable.end());
  bool any_arrangement = false;
  for (const auto& [id, o] : g.objects) {
    if (o.arrangement) {
      any_arrangement = true;
      ctx.relevant.insert(id);
      ctx.relevant.insert(o.arrangement->reveals);
    }
  }
  if (any_arrangement) {
    for (const auto& [id, o] : g.objects) {
      if (o.color && o.has(Affordance::movable)) ctx.relevant.insert(id);
    }
  }
  return ctx;
}

std::vector<Action> gated_actions(const SceneGraph& g, const SearchContext& ctx) {
  const AgentNode* agent = g.agent(ctx.agent);
  if (!agent) return {};
  const KnowledgeState know = derive_knowledge(g, agent->read_clues);
  std::vector<Action> legal = legal_actions(g, ctx.agent);
  // One drop per held object: the first surface, else the first container.
  std::map<std::string, act::Place> drop;
  for (const auto& action : legal) {
    const auto* p = std::get_if<act::Place>(&action);
    if (!p) continue;
    auto it = drop.find(p->object);
    if (it == drop.end()) {
      drop.emplace(p->object, *p);
    } else if (it->second.relation == act::PlaceRelation::inside && p->relation == act::PlaceRelation::on_top) {
      it->second = *p;
    }
  }
  std::vector<Action> out;
  for (auto& action : legal) {
    bool keep = std::visit(
        [&](const auto& a) -> bool {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, act::Open>) {
            return g.is_door(a.object) || ctx.goal_objects.count(a.object) || subtree_has(g, a.object, ctx.relevant);
          } else if constexpr (std::is_same_v<T, act::Close> || std::is_same_v<T, act::Lock> ||
                               std::is_same_v<T, act::Toggle>) {
            return ctx.goal_objects.count(a.object) != 0;
          } else if constexpr (std::is_same_v<T, act::PickUp>) {
            if (ctx.goal_objects.count(a.object)) return true;
            if (!ctx.lock_keys.count(a.object)) return false;
            auto parent = g.parent_of(a.object);
            if (parent && parent->kind == RelationKind::inside) return know.leads.count(parent->dst) != 0;
            return true;
          } else if constexpr (std::is_same_v<T, act::Place>) {
            if (ctx.goal_objects.count(a.target)) return true;
            auto it = drop.find(a.object);
            return it != drop.end() && it->second == a;
          } else if constexpr (std::is_same_v<T, act::Read>) {
            return ctx.readable.count(a.object) && !agent->has_read(a.object);
          } else if constexpr (std::is_same_v<T, act::Arrange>) {
            auto it = know.orders.find(a.target);
            if (it == know.orders.end() || it->second.size() != a.objects.size()) return false;
            for (std::size_t i = 0; i < a.objects.size(); ++i) {
              if (g.object(a.objects[i])->color != it->second[i]) return false;
            }
            return true;
          } else {
            return true;
          }
        },
        action);
    if (keep) out.push_back(std::move(action));
  }
  return out;
}

SolveResult solve(const SceneGraph& graph, const GoalSpec& goal, const SolveOptions& options) {
  SolveResult result;
  SearchContext ctx = make_search_context(graph, goal, options);
  if (goal_holds(graph, goal)) {
    result.status = SolveStatus::solved;
    result.states = 1;
    return result;
  }
  if (!graph.agent(ctx.agent)) return result;

  struct Record {
    int parent;
    Action action;
  };
  std::vector<Record> records{{-1, act::Wait{}}};
  std::unordered_set<Digest, DigestHash> seen{digest(graph)};
  std::vector<std::pair<SceneGraph, int>> frontier;
  frontier.emplace_back(graph, 0);

  while (!frontier.empty()) {
    std::vector<std::pair<SceneGraph, int>> next;
    for (const auto& [state, rec] : frontier) {
      for (auto& action : gated_actions(state, ctx)) {
        SceneGraph child = state;
        apply_in_place(child, ctx.agent, action);
        if (!seen.insert(digest(child)).second) continue;
        if (seen.size() > options.budget) {
          result.status = SolveStatus::budget_exceeded;
          result.states = seen.size();
          return result;
        }
        records.push_back({rec, std::move(action)});
        const int index = static_cast<int>(records.size()) - 1;
        if (goal_holds(child, goal)) {
          for (int i = index; i > 0; i = records[i].parent) result.plan.emplace_back(ctx.agent, records[i].action);
          std::reverse(result.plan.begin(), result.plan.end());
          result.status = SolveStatus::solved;
          result.states = seen.size();
          return result;
        }
        next.emplace_back(std::move(child), index);
      }
    }
    frontier = std::move(next);
  }
  result.states = seen.size();
  return result;
}

json to_json(const SolveResult& r) {
  json plan = json::array();
  for (const auto& [agent, action] : r.plan) plan.push_back({{"agent", agent}, {"action", to_json(action)}});
  json j = {{"status", to_string(r.status)}, {"states", r.states}};
  if (r.status == SolveStatus::solved) {
    j["plan"] = plan;
    j["optimal_length"] = r.plan.size();
  }
  return j;
}

}  // namespace vsim
