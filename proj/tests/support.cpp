#include "support.hpp"

#include "httplib.h"

#include "vsim/error.hpp"
#include "vsim/escape_room.hpp"
#include "vsim/household.hpp"

namespace vsim::fixtures {

ObjectNode make_object(const std::string& id, const std::string& category, std::set<Affordance> affordances,
                       std::map<std::string, bool> states) {
  ObjectNode o;
  o.id = id;
  o.category = category;
  o.display_name = category;
  o.affordances = std::move(affordances);
  o.states = std::move(states);
  return o;
}

SceneGraph two_room_house(int agents) {
  using A = Affordance;
  SceneGraph g;
  g.rooms["room_1"] = {"room_1", "Room 1"};
  g.rooms["room_2"] = {"room_2", "Room 2"};
  auto put = [&](ObjectNode o, RelationKind kind, const std::string& parent) {
    g.relations.insert({kind, o.id, parent});
    g.objects[o.id] = std::move(o);
  };
  put(make_object("door_1", "door", {A::openable}, {{"open", true}}), RelationKind::in_room, "room_1");
  g.relations.insert({RelationKind::connects, "door_1", "room_1"});
  g.relations.insert({RelationKind::connects, "door_1", "room_2"});
  put(make_object("box_1", "box", {A::openable, A::container, A::lockable}, {{"open", false}, {"locked", true}}),
      RelationKind::in_room, "room_1");
  g.objects["box_1"].lock = LockSpec{LockMechanism::key, "key_1", std::nullopt};
  put(make_object("table_1", "table", {A::surface}), RelationKind::in_room, "room_1");
  put(make_object("key_1", "key", {A::graspable, A::movable}), RelationKind::in_room, "room_1");
  put(make_object("key_2", "key", {A::graspable, A::movable}), RelationKind::in_room, "room_1");
  put(make_object("lamp_1", "lamp", {A::toggleable}, {{"on", false}}), RelationKind::in_room, "room_1");
  put(make_object("lamp_2", "lamp", {A::toggleable}, {{"on", false}}), RelationKind::in_room, "room_1");
  put(make_object("ball_1", "ball", {A::graspable, A::movable}), RelationKind::in_room, "room_2");
  for (int i = 1; i <= agents; ++i) {
    const std::string id = "agent_" + std::to_string(i);
    g.agents[id] = AgentNode{id, 1, {}, {}};
    g.relations.insert({RelationKind::in_room, id, "room_1"});
  }
  return g;
}

Step make_step(int tick, const std::string& agent, const std::string& room, Action action,
               std::optional<PreconditionCode> rejected, std::vector<std::string> first_seen) {
  Step s;
  s.tick = tick;
  s.agent = agent;
  s.room = room;
  s.first_seen = std::move(first_seen);
  s.action = std::move(action);
  if (rejected) {
    s.outcome.ok = false;
    s.outcome.reason = PreconditionError{*rejected, "fixture"};
  }
  return s;
}

namespace {

using P = PreconditionCode;

EpisodeTrace base_trace(const GoalSpec& goal, std::vector<std::string> agents, int budget) {
  EpisodeTrace t;
  t.task_id = "fixture";
  t.goal = goal;
  t.agents = std::move(agents);
  t.budget = budget;
  t.ticks = budget;
  t.terminal = Terminal::budget_exhausted;
  t.history.assign(goal.conjuncts.size(), {});
  t.goal_report.conjuncts.assign(goal.conjuncts.size(), {});
  return t;
}

GoalSpec key_on_table() {
  GoalSpec g;
  g.conjuncts.push_back({PredicateKind::object_on, "key_1", "table_1", "", true});
  return g;
}

GoalSpec lamp_on() {
  GoalSpec g;
  g.conjuncts.push_back({PredicateKind::state_is, "lamp_1", "", "on", true});
  return g;
}

}  // namespace

std::vector<std::pair<FailureCategory, std::vector<FixtureTrace>>> classifier_fixtures() {
  std::vector<std::pair<FailureCategory, std::vector<FixtureTrace>>> out;
  const SceneGraph one = two_room_house(1);
  const SceneGraph two = two_room_house(2);

  {
    std::vector<FixtureTrace> fam;
    // Cycles room_1 <-> room_2 five times without discovering anything.
    EpisodeTrace t = base_trace(key_on_table(), {"agent_1"}, 12);
    t.steps.push_back(make_step(1, "agent_1", "room_1", act::GoTo{"room_2"}, std::nullopt, {"box_1", "key_1"}));
    int tick = 2;
    for (int i = 0; i < 5; ++i) {
      t.steps.push_back(make_step(tick++, "agent_1", "room_2", act::GoTo{"room_1"}, std::nullopt,
                                  i == 0 ? std::vector<std::string>{"ball_1"} : std::vector<std::string>{}));
      t.steps.push_back(make_step(tick++, "agent_1", "room_1", act::GoTo{"room_2"}));
    }
    t.ticks = tick - 1;
    fam.push_back({"five_cycles", t, one});
    // Same loop with a phantom pick-up at the end; the loop rule comes first.
    EpisodeTrace u = t;
    u.steps.push_back(make_step(tick, "agent_1", "room_2", act::PickUp{"ghost_7"}, P::unknown_object));
    u.ticks = tick;
    fam.push_back({"loop_then_phantom", u, one});
    out.emplace_back(FailureCategory::exploration_loop, std::move(fam));
  }
  {
    std::vector<FixtureTrace> fam;
    EpisodeTrace t = base_trace(key_on_table(), {"agent_1"}, 4);
    t.steps.push_back(make_step(1, "agent_1", "room_1", act::PickUp{"ghost_7"}, P::unknown_object, {"key_1"}));
    t.steps.push_back(make_step(2, "agent_1", "room_1", act::Wait{}));
    fam.push_back({"ghost_pickup", t, one});
    EpisodeTrace u = t;
    u.steps.push_back(make_step(3, "agent_1", "room_1", act::Open{"box_1"}, P::locked));
    u.steps.push_back(make_step(4, "agent_1", "room_1", act::Open{"box_1"}, P::locked));
    fam.push_back({"ghost_before_locks", u, one});
    out.emplace_back(FailureCategory::phantom_goal, std::move(fam));
  }
  {
    std::vector<FixtureTrace> fam;
    // Both agents go for key_1 on two ticks.
    EpisodeTrace t = base_trace(key_on_table(), {"agent_1", "agent_2"}, 6);
    for (int tick = 1; tick <= 2; ++tick) {
      t.steps.push_back(make_step(tick, "agent_1", "room_1", act::PickUp{"key_1"}));
      t.steps.push_back(make_step(tick, "agent_2", "room_1", act::PickUp{"key_1"}, P::invalid_target));
    }
    fam.push_back({"shared_key", t, two});
    // Two assigned conjuncts nobody touched for the whole budget.
    GoalSpec g = key_on_table();
    g.conjuncts.push_back({PredicateKind::state_is, "lamp_1", "", "on", true});
    EpisodeTrace u = base_trace(g, {"agent_1", "agent_2"}, 6);
    u.allocation = {{0, "agent_1"}, {1, "agent_2"}};
    for (int tick = 1; tick <= 6; ++tick) {
      u.steps.push_back(make_step(tick, "agent_1", "room_1", act::Wait{}));
      u.steps.push_back(make_step(tick, "agent_2", "room_1", act::Toggle{"lamp_2"}));
    }
    fam.push_back({"idle_assignments", u, two});
    out.emplace_back(FailureCategory::coordination_failure, std::move(fam));
  }
  {
    std::vector<FixtureTrace> fam;
    EpisodeTrace t = base_trace(key_on_table(), {"agent_1"}, 4);
    t.steps.push_back(make_step(1, "agent_1", "room_1", act::Open{"box_1"}, P::locked));
    t.steps.push_back(make_step(2, "agent_1", "room_1", act::Open{"box_1"}, P::locked));
    fam.push_back({"locked_twice", t, one});
    EpisodeTrace u = base_trace(key_on_table(), {"agent_1"}, 4);
    u.steps.push_back(make_step(1, "agent_1", "room_1", act::Unlock{"box_1", "key_2", std::nullopt}, P::wrong_key));
    u.steps.push_back(make_step(2, "agent_1", "room_1", act::Place{"key_1", act::PlaceRelation::inside, "box_1"},
                                P::closed_container));
    u.steps.push_back(make_step(3, "agent_1", "room_1", act::PickUp{"table_1"}, P::not_affordant));
    fam.push_back({"wrong_key_then_closed", u, one});
    out.emplace_back(FailureCategory::state_assumption, std::move(fam));
  }
  {
    std::vector<FixtureTrace> fam;
    EpisodeTrace t = base_trace(key_on_table(), {"agent_1"}, 4);
    t.steps.push_back(make_step(1, "agent_1", "room_1", act::Place{"key_1", act::PlaceRelation::on_top, "table_1"},
                                P::not_held));
    fam.push_back({"place_unheld", t, one});
    EpisodeTrace u = base_trace(lamp_on(), {"agent_1"}, 4);
    u.steps.push_back(make_step(1, "agent_1", "room_1", act::PickUp{"table_1"}, P::not_affordant));
    u.steps.push_back(make_step(2, "agent_1", "room_1", act::Open{"box_1"}, P::locked));
    fam.push_back({"lift_table", u, one});
    out.emplace_back(FailureCategory::impossible_sequence, std::move(fam));
  }
  {
    std::vector<FixtureTrace> fam;
    EpisodeTrace t = base_trace(key_on_table(), {"agent_1"}, 4);
    t.steps.push_back(make_step(1, "agent_1", "room_1", act::PickUp{"key_2"}, std::nullopt, {"key_1", "key_2"}));
    t.steps.push_back(make_step(2, "agent_1", "room_1", act::Place{"key_2", act::PlaceRelation::on_top, "table_1"}));
    fam.push_back({"other_key", t, one});
    EpisodeTrace u = base_trace(lamp_on(), {"agent_1"}, 4);
    u.steps.push_back(make_step(1, "agent_1", "room_1", act::Toggle{"lamp_2"}));
    fam.push_back({"other_lamp", u, one});
    out.emplace_back(FailureCategory::object_confusion, std::move(fam));
  }
  return out;
}

namespace {

std::vector<std::string> keys_of(const std::map<std::string, ObjectNode>& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}

std::optional<Edit> random_edit(const SceneGraph& g, SplitMix64& rng, int serial) {
  using A = Affordance;
  std::vector<std::string> rooms, agents;
  for (const auto& [id, r] : g.rooms) rooms.push_back(id);
  for (const auto& [id, a] : g.agents) agents.push_back(id);
  const auto objects = keys_of(g.objects);
  std::vector<std::string> containers, surfaces;
  for (const auto& [id, o] : g.objects) {
    if (o.has(A::container)) containers.push_back(id);
    if (o.has(A::surface)) surfaces.push_back(id);
  }
  auto location = [&](RelationKind& kind, std::string& target) {
    switch (rng.below(4)) {
      case 1:
        if (!containers.empty()) {
          kind = RelationKind::inside;
          target = rng.pick(containers);
          return;
        }
        break;
      case 2:
        if (!surfaces.empty()) {
          kind = RelationKind::on_top;
          target = rng.pick(surfaces);
          return;
        }
        break;
      case 3:
        if (!agents.empty()) {
          kind = RelationKind::held_by;
          target = rng.pick(agents);
          return;
        }
        break;
      default:
        break;
    }
    kind = RelationKind::in_room;
    target = rng.pick(rooms);
  };

  switch (rng.below(5)) {
    case 0: {
      static const std::vector<std::string> cats = {"ball", "cup", "book", "crate"};
      const std::string cat = rng.pick(cats);
      ObjectNode o = make_object("added_" + std::to_string(serial), cat, {A::graspable, A::movable});
      if (cat == "crate") o = make_object(o.id, cat, {A::container, A::openable}, {{"open", true}});
      edit::Add add{o, RelationKind::in_room, ""};
      location(add.relation, add.target);
      return add;
    }
    case 1:
      if (objects.empty()) return std::nullopt;
      return edit::Remove{rng.pick(objects)};
    case 2: {
      if (objects.empty()) return std::nullopt;
      const std::string id = rng.pick(objects);
      ObjectNode o = g.objects.at(id);
      o.category += "_alt";
      o.display_name = "altered " + o.display_name;
      o.color = rng.coin() ? std::optional<std::string>("red") : std::nullopt;
      return edit::Replace{id, o};
    }
    case 3: {
      if (!agents.empty() && rooms.size() > 1 && rng.coin()) {
        return edit::Move{rng.pick(agents), RelationKind::in_room, rng.pick(rooms)};
      }
      if (objects.empty()) return std::nullopt;
      edit::Move m{rng.pick(objects), RelationKind::in_room, ""};
      location(m.relation, m.target);
      return m;
    }
    default: {
      if (objects.empty()) return std::nullopt;
      const std::string id = rng.pick(objects);
      const ObjectNode& o = g.objects.at(id);
      std::vector<std::string> states;
      for (const auto& [k, v] : o.states) states.push_back(k);
      if (states.empty()) states.push_back("on");
      return edit::SetState{id, rng.pick(states), rng.coin()};
    }
  }
}

}  // namespace

Mutation random_mutation(const SceneGraph& graph, SplitMix64& rng, int count) {
  Mutation m;
  m.after = graph;
  int serial = 0;
  for (int attempts = 0; static_cast<int>(m.edits.size()) < count && attempts < count * 20; ++attempts) {
    auto e = random_edit(m.after, rng, serial++);
    if (!e) continue;
    SceneGraph next = m.after;
    try {
      apply_edit(next, *e);
    } catch (const Error&) {
      continue;
    }
    m.after = std::move(next);
    m.edits.push_back(*e);
  }
  return m;
}

SceneGraph mutation_base(int index) {
  const auto seed = static_cast<std::uint64_t>(index);
  switch (index % 6) {
    case 4:
      return household_base(seed, 1);
    case 5:
      return household_base(seed, 2);
    default: {
      LevelConfig c;
      c.level = index % 6 + 1;
      c.seed = seed;
      return generate(c).graph;
    }
  }
}

SceneGraph tamper(const SceneGraph& graph, const Edit& e) {
  SceneGraph g = graph;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, edit::Add>) {
          g.erase_location(x.object.id);
        } else if constexpr (std::is_same_v<T, edit::Remove>) {
          g.objects[x.id] = make_object(x.id, "ghost", {});
          g.relations.insert({RelationKind::in_room, x.id, g.rooms.begin()->first});
        } else if constexpr (std::is_same_v<T, edit::Replace>) {
          g.objects.at(x.id).category += "_tampered";
        } else if constexpr (std::is_same_v<T, edit::Move>) {
          g.erase_location(x.id);
        } else {
          auto& states = g.objects.at(x.id).states;
          states[x.state] = !x.value;
        }
      },
      e);
  return g;
}

LiveServer::LiveServer(Service& service) : server_(std::make_unique<httplib::Server>()) {
  bind_routes(*server_, service);
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

LiveServer::~LiveServer() {
  server_->stop();
  thread_.join();
}

std::vector<ServerCall> endpoint_script() {
  LevelConfig c;
  c.level = 1;
  c.seed = 7;
  const Move first = generate(c).certificate.plan.front();
  const std::string coin = R"({"edits": [{"op": "add", "relation": "in_room", "target": "room_1",
    "object": {"id": "coin_1", "category": "coin", "name": "coin", "affordances": ["graspable"], "states": {}}}]})";
  return {
      {"GET", "/healthz", ""},
      {"POST", "/sessions", R"({"level": 1, "seed": 7})"},
      {"GET", "/sessions/{sid}/scene-graph", ""},
      {"GET", "/sessions/{sid}/agents/agent_1/observation", ""},
      {"POST", "/sessions/{sid}/actions", R"({"agent": "agent_1", "action": {"type": "pick_up", "object": "ghost_1"}})"},
      {"POST", "/sessions/{sid}/actions", json{{"moves", {to_json(first)}}}.dump()},
      {"POST", "/sessions/{sid}/edits", coin},
      {"GET", "/sessions/{sid}/goal-check", ""},
      {"POST", "/sessions/{sid}/recheck-solvable", R"({"budget": 50000})"},
      {"GET", "/sessions/{sid}/events", ""},
      {"GET", "/sessions/{sid}/agents/agent_9/observation", ""},
      {"GET", "/sessions/deadbeef/scene-graph", ""},
      {"POST", "/healthz", "{}"},
      {"PUT", "/sessions/{sid}/actions", "{}"},
      {"POST", "/sessions", R"({"level": 9})"},
      {"POST", "/sessions", "{not json"},
      {"POST", "/sessions/{sid}/actions", R"({"agent": "agent_1"})"},
      {"POST", "/sessions", R"({"scenario": "watch_tv", "seed": 2})"},
      {"POST", "/sessions", R"({"task_spec": {"subgoals": [{"kind": "held_by", "object_category": "cup"}]}})"},
      {"DELETE", "/sessions/{sid}", ""},
      {"GET", "/sessions/{sid}/scene-graph", ""},
  };
}

std::string with_sid(std::string path, const std::string& sid) {
  auto at = path.find("{sid}");
  if (at != std::string::npos) path.replace(at, 5, sid);
  return path;
}

std::pair<int, std::string> wire_call(int port, const ServerCall& call, const std::string& path) {
  httplib::Client cli("127.0.0.1", port);
  httplib::Result r;
  if (call.method == "GET") r = cli.Get(path);
  else if (call.method == "POST") r = cli.Post(path, call.body, "application/json");
  else if (call.method == "DELETE") r = cli.Delete(path);
  else if (call.method == "PUT") r = cli.Put(path, call.body, "application/json");
  if (!r) return {-1, httplib::to_string(r.error())};
  return {r->status, r->body};
}

std::optional<ErrorCode> error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace vsim::fixtures
