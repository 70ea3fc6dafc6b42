#include "vsim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <deque>

#include "vsim/error.hpp"
#include "vsim/knowledge.hpp"
#include "vsim/rng.hpp"
#include "vsim/solver.hpp"

namespace vsim {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

constexpr std::size_t kBeliefSolveBudget = 20000;

// ---------------------------------------------------------------------------
// Belief maintenance for the oracle

std::optional<std::string> candidate_key(const SceneGraph& b, const PolicyMemory& m, const KnowledgeState& know,
                                         const std::string& lock) {
  for (const auto& [id, o] : b.objects) {
    if (o.category != "key" || !o.has(Affordance::graspable)) continue;
    if (m.discredited.count({id, lock})) continue;
    auto origin = m.key_origin.find(id);
    if (origin == m.key_origin.end() || !know.leads.count(origin->second)) continue;
    return id;
  }
  return std::nullopt;
}

void drop_subtree(SceneGraph& b, const std::string& id) {
  for (const auto& child : b.children_of(id)) drop_subtree(b, child);
  b.erase_location(id);
  b.objects.erase(id);
}

void update_belief(PolicyMemory& m, const Observation& obs) {
  SceneGraph& b = m.belief;
  const std::string& self = obs.agent_id;
  auto ensure_room = [&](const std::string& id) {
    if (!b.rooms.count(id) && !b.objects.count(id) && !b.agents.count(id)) b.rooms[id] = RoomNode{id, id};
  };
  ensure_room(obs.room_id);

  // What should be in view but is not has moved or gone.
  std::set<std::string> visible;
  for (const auto& v : obs.visible_objects) visible.insert(v.id);
  b.agents[self].id = self;
  b.set_location({RelationKind::in_room, self, obs.room_id});
  std::vector<std::string> stale;
  for (const auto& [id, o] : b.objects) {
    (void)o;
    if (visible.count(id) || b.is_door(id)) continue;
    if (access_from(b, obs.room_id, self, id) == Access::ok) stale.push_back(id);
  }
  for (const auto& id : stale) {
    if (b.objects.count(id)) drop_subtree(b, id);
  }

  for (const auto& v : obs.visible_objects) {
    for (const auto& rel : v.relations) {
      if (rel.kind == RelationKind::connects || rel.kind == RelationKind::in_room) ensure_room(rel.dst);
    }
  }
  for (const auto& v : obs.visible_objects) {
    ObjectNode& o = b.objects[v.id];
    o.id = v.id;
    o.category = v.category;
    o.display_name = v.name;
    o.affordances = v.affordances;
    o.states = v.states;
    o.color = v.color;
    if (o.has(Affordance::readable) && !o.clue) o.clue = ClueText{};
    b.erase_location(v.id);
    for (const auto& rel : v.relations) {
      b.relations.insert(rel);
      if (rel.kind == RelationKind::inside && v.category == "key" && !m.key_origin.count(v.id)) {
        m.key_origin[v.id] = rel.dst;
      }
    }
  }

  AgentNode& me = b.agents[self];
  me.holding = obs.held;
  me.capacity = std::max<int>(1, static_cast<int>(obs.held.size()));
  me.read_clues.clear();
  for (const auto& c : obs.read_clues) {
    ClueText clue{c.text, c.referent, c.payload, Veracity::accurate};
    me.read_clues.push_back({c.object_id, clue});
    if (ObjectNode* o = b.object(c.object_id)) o->clue = clue;
  }

  // Locks: doors from the door view, other locked objects assumed keyed.
  for (const auto& d : obs.doors) {
    ObjectNode* door = b.object(d.door_id);
    if (!door || !d.lock) continue;
    if (!door->lock || door->lock->mechanism != *d.lock) door->lock = LockSpec{*d.lock, std::nullopt, std::nullopt};
    if (*d.lock == LockMechanism::code) door->lock->code = std::string(std::size_t(d.code_length.value_or(1)), '?');
  }
  for (auto& [id, o] : b.objects) {
    if (!o.lock && o.is_locked()) o.lock = LockSpec{LockMechanism::key, std::nullopt, std::nullopt};
  }
  // Colour orders need the arrangement before knowledge can see them.
  for (const auto& rc : me.read_clues) {
    if (!rc.clue.referent || !rc.clue.payload) continue;
    ObjectNode* r = b.object(*rc.clue.referent);
    if (r && r->has(Affordance::surface) && !r->lock && !r->arrangement) {
      r->arrangement = ArrangementSpec{split_order(*rc.clue.payload), ""};
    }
  }
  const KnowledgeState know = derive_knowledge(b, me.read_clues);
  const auto codes = know.codes();
  for (auto& [id, o] : b.objects) {
    if (!o.lock) continue;
    if (o.lock->mechanism == LockMechanism::key) {
      o.lock->key_id = candidate_key(b, m, know, id);
    } else {
      auto it = codes.find(id);
      if (it != codes.end() && o.lock->code && it->second.size() == o.lock->code->size()) o.lock->code = it->second;
    }
  }
}

std::optional<Action> first_step(const SceneGraph& b, const GoalSpec& goal, const std::string& self,
                                 std::vector<Action>& pending) {
  SolveOptions opt;
  opt.agent = self;
  opt.budget = kBeliefSolveBudget;
  SolveResult r = solve(b, goal, opt);
  if (r.status != SolveStatus::solved || r.plan.empty()) return std::nullopt;
  pending.clear();
  for (std::size_t i = 1; i < r.plan.size(); ++i) pending.push_back(r.plan[i].second);
  return r.plan.front().second;
}

GoalSpec single(Predicate p) {
  GoalSpec g;
  g.conjuncts.push_back(std::move(p));
  return g;
}

// Next hop from `from` toward `to` through believed doors; empty if none.
std::pair<std::string, std::string> next_hop(const SceneGraph& b, const std::string& from, const std::string& to) {
  std::map<std::string, std::pair<std::string, std::string>> via;  // room -> (prev, door)
  std::deque<std::string> q{from};
  via[from] = {"", ""};
  while (!q.empty()) {
    std::string r = q.front();
    q.pop_front();
    if (r == to) break;
    for (const auto& d : b.doors_of_room(r)) {
      for (const auto& n : b.door_rooms(d)) {
        if (via.count(n)) continue;
        via[n] = {r, d};
        q.push_back(n);
      }
    }
  }
  if (!via.count(to) || to == from) return {"", ""};
  std::string cur = to;
  while (via[cur].first != from) cur = via[cur].first;
  return {cur, via[cur].second};
}

std::optional<Action> head_to(PolicyMemory& m, const Observation& obs, const std::string& target);

std::optional<Action> explore(PolicyMemory& m, const Observation& obs) {
  const SceneGraph& b = m.belief;
  const std::string& self = obs.agent_id;
  const AgentNode& me = b.agents.at(self);
  const KnowledgeState know = derive_knowledge(b, me.read_clues);

  for (const auto& [id, o] : b.objects) {
    if (o.has(Affordance::readable) && !me.has_read(id)) {
      if (auto a = first_step(b, single({PredicateKind::clue_solved, id, "", "", true}), self, m.pending)) return a;
    }
  }
  for (const auto& [surface, order] : know.orders) {
    GoalSpec g;
    std::set<std::string> used;
    for (const auto& colour : order) {
      for (const auto& [id, o] : b.objects) {
        if (o.color == colour && o.has(Affordance::movable) && !used.count(id)) {
          used.insert(id);
          g.conjuncts.push_back({PredicateKind::object_on, id, surface, "", true});
          break;
        }
      }
    }
    if (g.conjuncts.size() != order.size()) continue;
    if (auto a = first_step(b, g, self, m.pending)) return a;
  }
  auto try_open = [&](bool leads_only) -> std::optional<Action> {
    for (const auto& [id, o] : b.objects) {
      if (b.is_door(id) || !o.has(Affordance::openable) || o.is_open()) continue;
      if (leads_only != (know.leads.count(id) != 0)) continue;
      if (auto a = first_step(b, single({PredicateKind::state_is, id, "", std::string(state::open), true}), self,
                              m.pending)) {
        return a;
      }
    }
    return std::nullopt;
  };
  if (auto a = try_open(true)) return a;
  if (auto a = try_open(false)) return a;

  std::vector<std::string> rooms;
  for (const auto& [id, r] : b.rooms) {
    (void)r;
    if (id != obs.room_id) rooms.push_back(id);
  }
  std::stable_sort(rooms.begin(), rooms.end(), [&](const std::string& x, const std::string& y) {
    auto vx = m.visits.count(x) ? m.visits.at(x) : 0;
    auto vy = m.visits.count(y) ? m.visits.at(y) : 0;
    return vx < vy;
  });
  for (const auto& target : rooms) {
    if (auto a = head_to(m, obs, target)) return a;
  }
  return std::nullopt;
}

// One step toward `target` through believed doors, opening the next door if
// needed.
std::optional<Action> head_to(PolicyMemory& m, const Observation& obs, const std::string& target) {
  auto [hop, door] = next_hop(m.belief, obs.room_id, target);
  if (hop.empty()) return std::nullopt;
  const ObjectNode* d = m.belief.object(door);
  if (d && d->is_open()) {
    m.pending.clear();
    return act::GoTo{hop};
  }
  return first_step(m.belief, single({PredicateKind::door_open, door, "", "", true}), obs.agent_id, m.pending);
}

bool is_mine(const GoalSpec& goal, int i, const std::string& self) {
  auto it = goal.assignments.find(i);
  return it == goal.assignments.end() || it->second == self;
}

class OraclePolicy : public Policy {
 public:
  std::string name() const override { return "oracle"; }

  Action decide(const PolicyContext& ctx, PolicyMemory& m) override {
    const Observation& obs = ctx.obs;
    const std::string& self = obs.agent_id;
    ++m.visits[obs.room_id];
    bool rejected = m.last_outcome && !m.last_outcome->ok;
    if (rejected && m.last_action && m.last_outcome->reason &&
        m.last_outcome->reason->code == PreconditionCode::wrong_key) {
      if (const auto* u = std::get_if<act::Unlock>(&*m.last_action); u && u->key) {
        m.discredited.insert({*u->key, u->object});
      }
    }
    update_belief(m, obs);
    const std::uint64_t digest = fnv1a64(to_json(m.belief).dump()) ^ (m.discredited.size() * 0x9E3779B97F4A7C15ULL);
    const bool changed = digest != m.belief_digest;
    m.belief_digest = digest;

    if (!changed && !rejected && !m.pending.empty()) {
      Action next = m.pending.front();
      m.pending.erase(m.pending.begin());
      return next;
    }
    m.pending.clear();

    // Own conjuncts whose ordering predecessors already hold.
    GoalSpec goal;
    std::vector<int> blocked_by;
    for (std::size_t i = 0; i < ctx.goal.conjuncts.size(); ++i) {
      if (!is_mine(ctx.goal, static_cast<int>(i), self)) continue;
      bool ready = true;
      for (const auto& [before, after] : ctx.goal.ordering) {
        if (after == static_cast<int>(i) && !predicate_holds(m.belief, ctx.goal.conjuncts[before])) {
          ready = false;
          blocked_by.push_back(before);
        }
      }
      if (ready) goal.conjuncts.push_back(ctx.goal.conjuncts[i]);
    }
    if (!goal.conjuncts.empty() && !goal_holds(m.belief, goal)) {
      if (auto a = first_step(m.belief, goal, self, m.pending)) return *a;
      if (auto a = explore(m, obs)) return *a;
      return act::Wait{};
    }
    // Waiting on someone else's conjunct: stand where it will happen, or
    // search until that place is known.
    bool located = false;
    for (int b : blocked_by) {
      if (is_mine(ctx.goal, b, self)) continue;
      const Predicate& p = ctx.goal.conjuncts[b];
      std::string room = m.belief.room_of(p.target.empty() ? p.object : p.target);
      if (room.empty()) continue;
      located = true;
      if (room == obs.room_id) break;
      if (auto a = head_to(m, obs, room)) return *a;
    }
    if (!blocked_by.empty() && !located) {
      if (auto a = explore(m, obs)) return *a;
    }
    return act::Wait{};
  }
};

class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "random"; }

  Action decide(const PolicyContext& ctx, PolicyMemory& m) override {
    if (!m.initialized) {
      m.rng_state = mix_seed(m.rng_state, seed_);
      m.initialized = true;
    }
    if (ctx.legal.empty()) return act::Wait{};
    SplitMix64 rng(m.rng_state);
    Action a = rng.pick(ctx.legal);
    m.rng_state = rng.state();
    return a;
  }

 private:
  std::uint64_t seed_;
};

class ScriptedPolicy : public Policy {
 public:
  explicit ScriptedPolicy(std::vector<Action> plan) : plan_(std::move(plan)) {}
  std::string name() const override { return "scripted"; }

  Action decide(const PolicyContext&, PolicyMemory& m) override {
    if (m.cursor >= plan_.size()) return act::Wait{};
    return plan_[m.cursor++];
  }

 private:
  std::vector<Action> plan_;
};

std::vector<ConjunctHistory> initial_history(const SceneGraph& g, const GoalSpec& goal) {
  std::vector<ConjunctHistory> h(goal.conjuncts.size());
  for (std::size_t i = 0; i < goal.conjuncts.size(); ++i) {
    if (predicate_holds(g, goal.conjuncts[i])) h[i] = {0, 0, ""};
  }
  return h;
}

}  // namespace

json to_json(const PolicyMemory& m) {
  json visits = json::object();
  for (const auto& [r, n] : m.visits) visits[r] = n;
  json pending = json::array();
  for (const auto& a : m.pending) pending.push_back(to_json(a));
  json disc = json::array();
  for (const auto& [k, l] : m.discredited) disc.push_back({k, l});
  json j = {{"rng_state", hex64(m.rng_state)},
            {"visits", visits},
            {"pending", pending},
            {"cursor", m.cursor},
            {"discredited", disc},
            {"key_origin", m.key_origin},
            {"transcript", m.transcript},
            {"log", m.log}};
  if (!m.belief.rooms.empty()) j["belief"] = to_json(m.belief);
  return j;
}

std::unique_ptr<Policy> oracle_policy(std::uint64_t) { return std::make_unique<OraclePolicy>(); }
std::unique_ptr<Policy> random_policy(std::uint64_t seed) { return std::make_unique<RandomPolicy>(seed); }
std::unique_ptr<Policy> scripted_policy(std::vector<Action> plan) {
  return std::make_unique<ScriptedPolicy>(std::move(plan));
}

std::string_view to_string(Terminal t) {
  switch (t) {
    case Terminal::success:
      return "success";
    case Terminal::budget_exhausted:
      return "budget_exhausted";
    case Terminal::policy_error:
      return "policy_error";
  }
  return "?";
}

json to_json(const EpisodeTrace& t, bool include_duration) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"tick", s.tick},
                     {"agent", s.agent},
                     {"room", s.room},
                     {"first_seen", s.first_seen},
                     {"observation_digest", s.observation_digest},
                     {"action", to_json(s.action)},
                     {"outcome", to_json(s.outcome)}});
  }
  json alloc = json::object();
  for (const auto& [i, a] : t.allocation) alloc[std::to_string(i)] = a;
  json history = json::array();
  for (const auto& h : t.history) history.push_back(to_json(h));
  json j = {{"schema_version", "1"},
            {"task_id", t.task_id},
            {"goal", to_json(t.goal)},
            {"seed", t.seed},
            {"agents", t.agents},
            {"allocation", alloc},
            {"budget", t.budget},
            {"steps", steps},
            {"terminal", to_string(t.terminal)},
            {"ticks", t.ticks},
            {"goal_report", to_json(t.goal_report)},
            {"history", history},
            {"visibility_violations", t.visibility_violations},
            {"observations", t.observations}};
  if (!t.policy_error.empty()) j["policy_error"] = t.policy_error;
  if (include_duration) j["duration_seconds"] = t.duration_seconds;
  return j;
}

EpisodeTrace trace_from_json(const json& doc) {
  try {
    EpisodeTrace t;
    if (doc.value("schema_version", "") != "1") throw schema_error("/schema_version", "expected \"1\"");
    t.task_id = doc.at("task_id").get<std::string>();
    t.goal = goal_from_json(doc.at("goal"), "/goal");
    t.seed = doc.at("seed").get<std::uint64_t>();
    t.agents = doc.at("agents").get<std::vector<std::string>>();
    for (const auto& [k, v] : doc.at("allocation").items()) t.allocation[std::stoi(k)] = v.get<std::string>();
    t.budget = doc.at("budget").get<int>();
    const json& steps = doc.at("steps");
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const json& s = steps[i];
      const std::string p = "/steps/" + std::to_string(i);
      Step st;
      st.tick = s.at("tick").get<int>();
      st.agent = s.at("agent").get<std::string>();
      st.room = s.at("room").get<std::string>();
      st.first_seen = s.at("first_seen").get<std::vector<std::string>>();
      st.observation_digest = s.at("observation_digest").get<std::string>();
      st.action = action_from_json(s.at("action"), p + "/action");
      st.outcome = outcome_from_json(s.at("outcome"), p + "/outcome");
      t.steps.push_back(std::move(st));
    }
    const std::string term = doc.at("terminal").get<std::string>();
    if (term == "success") t.terminal = Terminal::success;
    else if (term == "budget_exhausted") t.terminal = Terminal::budget_exhausted;
    else if (term == "policy_error") t.terminal = Terminal::policy_error;
    else throw schema_error("/terminal", "unknown terminal");
    t.ticks = doc.at("ticks").get<int>();
    const json& gr = doc.at("goal_report");
    t.goal_report.passed = gr.at("passed").get<bool>();
    t.goal_report.satisfied_fraction = gr.at("satisfied_fraction").get<double>();
    for (const auto& c : gr.at("conjuncts")) {
      ConjunctResult r;
      r.holds = c.at("holds").get<bool>();
      r.ordering_ok = c.at("ordering_ok").get<bool>();
      r.assignment_ok = c.at("assignment_ok").get<bool>();
      r.passed = c.at("passed").get<bool>();
      r.detail = c.value("detail", "");
      t.goal_report.conjuncts.push_back(std::move(r));
    }
    for (const auto& h : doc.at("history")) {
      ConjunctHistory ch;
      if (!h.at("tick").is_null()) ch.tick = h.at("tick").get<int>();
      if (!h.at("step").is_null()) ch.step = h.at("step").get<int>();
      ch.agent = h.at("agent").get<std::string>();
      t.history.push_back(std::move(ch));
    }
    t.visibility_violations = doc.at("visibility_violations").get<int>();
    t.observations = doc.at("observations").get<int>();
    t.policy_error = doc.value("policy_error", "");
    t.duration_seconds = doc.value("duration_seconds", 0.0);
    return t;
  } catch (const json::exception& e) {
    throw schema_error("", std::string("malformed trace: ") + e.what());
  }
}

int room_distance(const SceneGraph& g, const std::string& from, const std::string& to) {
  if (from.empty() || to.empty()) return -1;
  std::map<std::string, int> dist{{from, 0}};
  std::deque<std::string> q{from};
  while (!q.empty()) {
    std::string r = q.front();
    q.pop_front();
    if (r == to) return dist[r];
    for (const auto& d : g.doors_of_room(r)) {
      for (const auto& n : g.door_rooms(d)) {
        if (dist.count(n)) continue;
        dist[n] = dist[r] + 1;
        q.push_back(n);
      }
    }
  }
  return -1;
}

std::map<int, std::string> allocate_subgoals(const GoalSpec& goal, const std::vector<std::string>& agents,
                                             const SceneGraph& graph) {
  if (agents.empty()) throw Error(ErrorCode::InvalidConfig, "no agents to allocate to");
  std::vector<std::string> sorted = agents;
  std::sort(sorted.begin(), sorted.end());
  std::map<int, std::string> out = goal.assignments;
  auto cost = [&](const std::string& agent, int i) {
    int d = room_distance(graph, graph.room_of(agent), graph.room_of(goal.conjuncts[i].object));
    return 1 + (d < 0 ? static_cast<int>(graph.rooms.size()) : d);
  };
  std::map<std::string, int> load;
  for (const auto& [i, a] : out) {
    if (i >= 0 && i < static_cast<int>(goal.conjuncts.size())) load[a] += cost(a, i);
  }
  for (std::size_t i = 0; i < goal.conjuncts.size(); ++i) {
    const int idx = static_cast<int>(i);
    if (out.count(idx)) continue;
    std::string best;
    int best_total = 0;
    int best_cost = 0;
    for (const auto& a : sorted) {
      const int c = cost(a, idx);
      if (best.empty() || load[a] + c < best_total) {
        best = a;
        best_total = load[a] + c;
        best_cost = c;
      }
    }
    out[idx] = best;
    load[best] += best_cost;
  }
  return out;
}

EpisodeResult run_episode(const SceneGraph& room, const GoalSpec& goal, const std::map<std::string, Policy*>& policies,
                          const EpisodeConfig& config) {
  if (config.budget < 1) throw Error(ErrorCode::InvalidConfig, "budget must be at least 1");
  for (const auto& [aid, a] : room.agents) {
    (void)a;
    if (!policies.count(aid) || !policies.at(aid)) throw Error(ErrorCode::InvalidConfig, "no policy for " + aid);
  }
  for (const auto& [aid, p] : policies) {
    (void)p;
    if (!room.agent(aid)) throw Error(ErrorCode::UnknownAgent, "policy for unknown agent '" + aid + "'");
  }
  const auto started = std::chrono::steady_clock::now();
  EpisodeResult result{EpisodeTrace{}, room};
  EpisodeTrace& t = result.trace;
  SceneGraph& g = result.final_graph;
  t.task_id = config.task_id;
  t.goal = goal;
  t.seed = config.seed;
  t.budget = config.budget;
  t.allocation = config.allocation;
  for (const auto& [aid, a] : room.agents) {
    (void)a;
    t.agents.push_back(aid);
  }

  std::map<std::string, PolicyMemory> memory;
  std::map<std::string, GoalSpec> goals;
  std::map<std::string, std::set<std::string>> seen;
  for (std::size_t i = 0; i < t.agents.size(); ++i) {
    const auto& aid = t.agents[i];
    memory[aid].rng_state = mix_seed(config.seed, i + 1);
    goals[aid] = goal;
    for (const auto& [c, who] : config.allocation) goals[aid].assignments[c] = who;
  }
  t.history = initial_history(g, goal);
  t.goal_report = goal_check(g, goal, t.history);
  int step = 0;
  bool done = t.goal_report.passed;
  if (done) t.terminal = Terminal::success;

  for (int tick = 1; tick <= config.budget && !done; ++tick) {
    std::vector<Step> decided;
    for (const auto& aid : t.agents) {
      Observation obs = observe(g, aid);
      ++t.observations;
      t.visibility_violations += static_cast<int>(observation_violations(g, obs).size());
      Step s;
      s.tick = tick;
      s.agent = aid;
      s.room = obs.room_id;
      for (const auto& v : obs.visible_objects) {
        if (seen[aid].insert(v.id).second) s.first_seen.push_back(v.id);
      }
      s.observation_digest = hex64(fnv1a64(to_json(obs).dump()));
      std::vector<Action> legal = legal_actions(g, aid);
      PolicyContext ctx{obs, goals[aid], legal, tick};
      try {
        s.action = policies.at(aid)->decide(ctx, memory[aid]);
      } catch (const std::exception& e) {
        t.terminal = Terminal::policy_error;
        t.policy_error = aid + ": " + e.what();
        done = true;
        break;
      }
      decided.push_back(std::move(s));
    }
    if (done) {
      t.ticks = tick;
      break;
    }
    for (auto& s : decided) {
      s.outcome = apply_in_place(g, s.agent, s.action);
      PolicyMemory& m = memory[s.agent];
      m.last_action = s.action;
      m.last_outcome = s.outcome;
      ++step;
      for (std::size_t i = 0; i < goal.conjuncts.size(); ++i) {
        if (!t.history[i].tick && predicate_holds(g, goal.conjuncts[i])) t.history[i] = {tick, step, s.agent};
      }
      t.steps.push_back(std::move(s));
    }
    t.ticks = tick;
    t.goal_report = goal_check(g, goal, t.history);
    if (t.goal_report.passed) {
      t.terminal = Terminal::success;
      done = true;
    }
  }
  t.goal_report = goal_check(g, goal, t.history);
  if (t.terminal != Terminal::policy_error) {
    t.terminal = t.goal_report.passed ? Terminal::success : Terminal::budget_exhausted;
  }
  t.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace vsim
