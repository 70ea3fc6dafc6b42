#include "vsim/household.hpp"

#include "vsim/error.hpp"
#include "vsim/rng.hpp"
#include "vsim/solver.hpp"

namespace vsim {

namespace {

using A = Affordance;

const std::vector<std::string> kRooms = {"living_room", "kitchen", "bedroom"};

void put(SceneGraph& g, const std::string& id, const std::string& name, std::set<Affordance> affs,
         const std::string& room) {
  ObjectNode o;
  o.id = id;
  o.category = id.substr(0, id.rfind('_'));
  o.display_name = name;
  o.affordances = std::move(affs);
  if (o.has(A::openable)) o.states[std::string(state::open)] = false;
  if (o.has(A::toggleable)) o.states[std::string(state::on)] = false;
  g.objects.emplace(id, std::move(o));
  g.relations.insert({RelationKind::in_room, id, room});
}

void door(SceneGraph& g, const std::string& id, const std::string& a, const std::string& b, bool open) {
  ObjectNode o;
  o.id = id;
  o.category = "door";
  o.display_name = "door";
  o.affordances = {A::openable};
  o.states[std::string(state::open)] = open;
  g.objects.emplace(id, std::move(o));
  g.relations.insert({RelationKind::in_room, id, a});
  g.relations.insert({RelationKind::connects, id, a});
  g.relations.insert({RelationKind::connects, id, b});
}

void hide_inside(SceneGraph& g, const std::string& id, const std::string& container) {
  g.set_location({RelationKind::inside, id, container});
}

int optimal_or_throw(const Scenario& s) {
  SolveResult r = solve(s.graph, s.goal);
  if (r.status != SolveStatus::solved) {
    throw Error(ErrorCode::GenerationFailure, "scenario " + s.id + " has no plan (" +
                                                  std::string(to_string(r.status)) + ")");
  }
  return static_cast<int>(r.plan.size());
}

}  // namespace

SceneGraph household_base(std::uint64_t seed, int agents) {
  if (agents < 1) throw Error(ErrorCode::InvalidConfig, "need at least one agent");
  SplitMix64 rng(mix_seed(seed, 0x40));
  SceneGraph g;
  g.rooms["living_room"] = {"living_room", "living room"};
  g.rooms["kitchen"] = {"kitchen", "kitchen"};
  g.rooms["bedroom"] = {"bedroom", "bedroom"};
  door(g, "door_1", "living_room", "kitchen", true);
  door(g, "door_2", "living_room", "bedroom", false);
  put(g, "sofa_1", "sofa", {A::surface}, "living_room");
  put(g, "tv_1", "television", {A::toggleable}, "living_room");
  put(g, "bin_1", "waste bin", {A::container}, "living_room");
  put(g, "counter_1", "kitchen counter", {A::surface}, "kitchen");
  put(g, "fridge_1", "fridge", {A::openable, A::container}, "kitchen");
  put(g, "stove_1", "stove", {A::toggleable}, "kitchen");
  put(g, "sink_1", "sink", {A::container}, "kitchen");
  put(g, "bed_1", "bed", {A::surface}, "bedroom");
  put(g, "shelf_1", "bookshelf", {A::surface}, "bedroom");
  put(g, "cabinet_1", "wardrobe", {A::openable, A::container}, "bedroom");
  put(g, "basket_1", "laundry basket", {A::container}, "bedroom");
  for (int i = 1; i <= agents; ++i) {
    const std::string id = "agent_" + std::to_string(i);
    g.agents[id] = AgentNode{id, 1, {}, {}};
    g.relations.insert({RelationKind::in_room, id, i == 1 ? kRooms[0] : rng.pick(kRooms)});
  }
  return g;
}

std::vector<std::string> household_scenarios() {
  return {"clean_floor", "watch_tv", "find_object", "prepare_food", "clean_room"};
}

TaskSpec household_task(const std::string& name) {
  json doc;
  if (name == "clean_floor") {
    doc = {{"description", "Put the rubbish lying around into the waste bin."},
           {"subgoals",
            {{{"kind", "object_in"}, {"object_category", "trash"}, {"count", 2}, {"target_category", "bin"}}}}};
  } else if (name == "watch_tv") {
    doc = {{"description", "Turn the television on and pick up the remote."},
           {"subgoals",
            {{{"kind", "state_is"}, {"object_category", "tv"}, {"state", "on"}, {"value", true}},
             {{"kind", "held_by"}, {"object_category", "remote"}}}}};
  } else if (name == "find_object") {
    doc = {{"description", "Find the phone and hold it."},
           {"subgoals", {{{"kind", "held_by"}, {"object_category", "phone"}}}}};
  } else if (name == "prepare_food") {
    doc = {{"description", "Put the apple on the counter, then switch the stove on."},
           {"subgoals",
            {{{"kind", "object_on"}, {"object_category", "apple"}, {"target_category", "counter"}},
             {{"kind", "state_is"}, {"object_category", "stove"}, {"state", "on"}, {"value", true}}}},
           {"constraints", {{{"order", {0, 1}}}}}};
  } else if (name == "clean_room") {
    doc = {{"description", "Shelve the books and put the shirt in the laundry basket."},
           {"subgoals",
            {{{"kind", "object_on"}, {"object_category", "book"}, {"count", 2}, {"target_category", "shelf"}},
             {{"kind", "object_in"}, {"object_category", "shirt"}, {"target_category", "basket"}}}}};
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown scenario '" + name + "'");
  }
  return validate_task_spec(doc);
}

Scenario household_scenario(const std::string& name, std::uint64_t seed, int agents) {
  if (agents != 1 && agents != 2) throw Error(ErrorCode::InvalidConfig, "household scenarios take 1 or 2 agents");
  TaskSpec spec = household_task(name);
  if (agents == 2 && name == "prepare_food") {
    Constraint a;
    a.kind = Constraint::Kind::assign;
    a.subgoal = 0;
    a.agent = "agent_1";
    spec.constraints.push_back(a);
    a.subgoal = 1;
    a.agent = "agent_2";
    spec.constraints.push_back(a);
  }
  Instantiation inst = instantiate(spec, household_base(seed, agents), mix_seed(seed, 0x41));
  SplitMix64 rng(mix_seed(seed, 0x42));
  if (name == "find_object" && rng.coin()) hide_inside(inst.graph, "phone_1", "cabinet_1");
  if (name == "prepare_food") hide_inside(inst.graph, "apple_1", "fridge_1");
  Scenario s{name, std::move(inst.graph), std::move(inst.goal), 0};
  s.optimal_length = optimal_or_throw(s);
  return s;
}

Scenario two_part_task(std::uint64_t seed, int agents) {
  if (agents != 1 && agents != 2) throw Error(ErrorCode::InvalidConfig, "two_part_task takes 1 or 2 agents");
  SplitMix64 rng(mix_seed(seed, 0x43));
  std::vector<std::string> rooms = kRooms;
  rng.shuffle(rooms);
  json doc = {{"description", "Carry the cup to the sink and switch the lamp on."},
              {"subgoals",
               {{{"kind", "object_in"}, {"object_category", "cup"}, {"target_category", "sink"}, {"room", rooms[0]}},
                {{"kind", "state_is"},
                 {"object_category", "lamp"},
                 {"state", "on"},
                 {"value", true},
                 {"room", rooms[1]}}}}};
  SceneGraph base = household_base(seed, 2);
  if (agents == 1) base = remove_node(std::move(base), "agent_2");
  Instantiation inst = instantiate(validate_task_spec(doc), base, mix_seed(seed, 0x44));
  Scenario s{"two_part", std::move(inst.graph), std::move(inst.goal), 0};
  s.optimal_length = optimal_or_throw(s);
  return s;
}

}  // namespace vsim
