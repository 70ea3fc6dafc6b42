#include "vsim/escape_room.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "json_util.hpp"
#include "vsim/error.hpp"
#include "vsim/rng.hpp"

namespace vsim {

namespace {

constexpr int kRetryBudget = 32;

const std::vector<std::string> kRoomNames = {"Study",   "Library", "Workshop", "Cellar",
                                             "Attic",   "Gallery", "Parlour",  "Vault"};
const std::vector<std::string> kBoxAdjectives = {"wooden", "iron",  "painted", "lacquered", "dented",
                                                 "carved", "tin",   "leather", "oak",       "copper"};
const std::vector<std::string> kKeyAdjectives = {"brass", "silver", "rusty", "iron", "bone", "gilded"};
const std::vector<std::string> kColours = {"red", "blue", "green", "yellow", "purple", "orange", "white"};
const std::vector<std::string> kLeadTemplates = {"What you need rests in the {}.", "Look inside the {}.",
                                                 "The key was hidden in the {}.", "Try the {}."};
const std::vector<std::string> kFlavourTexts = {"Dust covers everything here.", "A shopping list: eggs, flour, tea.",
                                                "The ink has faded beyond reading.", "Do not forget to water the fern.",
                                                "Meeting moved to Thursday."};

std::string fill(const std::string& tmpl, const std::string& value) {
  std::string out = tmpl;
  auto pos = out.find("{}");
  if (pos != std::string::npos) out.replace(pos, 2, value);
  return out;
}

// Objects are built under role names, then renumbered per category in a
// shuffled order so the puzzle pieces do not always get the low ids.
struct Proto {
  std::string role;
  ObjectNode node;
  RelationKind kind = RelationKind::in_room;
  std::string host;  // role or room id
};

class Builder {
 public:
  Builder(SplitMix64& rng, int room_count) : rng_(rng) {
    std::vector<std::string> names = kRoomNames;
    rng_.shuffle(names);
    for (int i = 1; i <= room_count; ++i) rooms_.push_back({"room_" + std::to_string(i), names[i - 1]});
    box_adjectives_ = kBoxAdjectives;
    rng_.shuffle(box_adjectives_);
    key_adjectives_ = kKeyAdjectives;
    rng_.shuffle(key_adjectives_);
    for (const auto& r : rooms_) {
      add("#table_" + r.id, "table", "table", {Affordance::surface}, {}, RelationKind::in_room, r.id);
    }
  }

  const std::vector<RoomNode>& rooms() const { return rooms_; }
  std::string random_room() { return rooms_[rng_.below(rooms_.size())].id; }

  ObjectNode& add(const std::string& role, const std::string& category, const std::string& name,
                  std::set<Affordance> affordances, std::map<std::string, bool> states, RelationKind kind,
                  const std::string& host) {
    Proto p;
    p.role = role;
    p.node.category = category;
    p.node.display_name = name;
    p.node.affordances = std::move(affordances);
    p.node.states = std::move(states);
    p.kind = kind;
    p.host = host;
    protos_.push_back(std::move(p));
    return protos_.back().node;
  }

  // Loose item: on the room's table or on the floor.
  void place_loose(const std::string& role, const std::string& room) {
    Proto& p = find(role);
    if (rng_.coin()) {
      p.kind = RelationKind::on_top;
      p.host = "#table_" + room;
    } else {
      p.kind = RelationKind::in_room;
      p.host = room;
    }
  }

  ObjectNode& box(const std::string& role, RelationKind kind, const std::string& host) {
    const std::string adj = box_adjectives_[next_box_++ % box_adjectives_.size()];
    return add(role, "box", adj + " box", {Affordance::openable, Affordance::container}, {{"open", false}}, kind,
               host);
  }

  ObjectNode& key(const std::string& role, RelationKind kind, const std::string& host) {
    const std::string adj = key_adjectives_[next_key_++ % key_adjectives_.size()];
    return add(role, "key", adj + " key", {Affordance::graspable}, {}, kind, host);
  }

  ObjectNode& note(const std::string& role, ClueText clue, RelationKind kind, const std::string& host) {
    ObjectNode& n = add(role, "note", "note", {Affordance::readable, Affordance::graspable}, {}, kind, host);
    n.clue = std::move(clue);
    return n;
  }

  std::string name_of(const std::string& role) { return find(role).node.display_name; }

  void decoys(int count) {
    for (int i = 0; i < count; ++i) {
      const std::string role = "#decoy_" + std::to_string(i);
      const std::string room = random_room();
      switch (rng_.below(4)) {
        case 0:
          box(role, RelationKind::in_room, room);
          break;
        case 1:
          key(role, RelationKind::in_room, room);
          place_loose(role, room);
          break;
        case 2:
          note(role, ClueText{kFlavourTexts[rng_.below(kFlavourTexts.size())], std::nullopt, std::nullopt,
                              Veracity::accurate},
               RelationKind::in_room, room);
          place_loose(role, room);
          break;
        default:
          add(role, "lamp", "lamp", {Affordance::toggleable}, {{"on", false}}, RelationKind::in_room, room);
          break;
      }
    }
  }

  // Renumbers, resolves role references and assembles the graph.
  SceneGraph build(std::map<std::string, std::string>& ids) {
    std::map<std::string, std::vector<std::string>> by_category;
    for (const auto& p : protos_) {
      if (p.role.rfind("=", 0) == 0) continue;
      by_category[p.node.category].push_back(p.role);
    }
    for (auto& [category, roles] : by_category) {
      rng_.shuffle(roles);
      for (std::size_t i = 0; i < roles.size(); ++i) ids[roles[i]] = category + "_" + std::to_string(i + 1);
    }
    for (const auto& p : protos_) {
      if (p.role.rfind("=", 0) == 0) ids[p.role] = p.role.substr(1);
    }
    auto resolve = [&](const std::string& s) {
      auto it = ids.find(s);
      return it == ids.end() ? s : it->second;
    };

    SceneGraph g;
    for (const auto& r : rooms_) g.rooms.emplace(r.id, r);
    g.rooms.emplace(std::string(kOutside), RoomNode{std::string(kOutside), "Outside"});
    for (auto p : protos_) {
      ObjectNode& n = p.node;
      n.id = ids.at(p.role);
      if (n.lock && n.lock->key_id) n.lock->key_id = resolve(*n.lock->key_id);
      if (n.clue && n.clue->referent) n.clue->referent = resolve(*n.clue->referent);
      if (n.arrangement) n.arrangement->reveals = resolve(n.arrangement->reveals);
      g.relations.insert({p.kind, n.id, resolve(p.host)});
      g.objects.emplace(n.id, std::move(n));
    }
    AgentNode agent;
    agent.id = "agent_1";
    g.agents.emplace(agent.id, agent);
    g.relations.insert({RelationKind::in_room, agent.id, rooms_.front().id});
    return g;
  }

  Proto& find(const std::string& role) {
    for (auto& p : protos_) {
      if (p.role == role) return p;
    }
    throw Error(ErrorCode::GenerationFailure, "internal: unknown role " + role);
  }

 private:
  SplitMix64& rng_;
  std::vector<RoomNode> rooms_;
  std::deque<Proto> protos_;
  std::vector<std::string> box_adjectives_;
  std::vector<std::string> key_adjectives_;
  std::size_t next_box_ = 0;
  std::size_t next_key_ = 0;
};

// Roles starting with '=' keep a fixed id (doors).
void add_doors(Builder& b, std::optional<LockSpec> exit_lock) {
  ObjectNode& exit = b.add("=" + std::string(kExitDoor), "door", "exit door",
                           {Affordance::openable, Affordance::lockable}, {{"open", false}, {"locked", true}},
                           RelationKind::in_room, b.rooms().front().id);
  exit.lock = std::move(exit_lock);
  for (std::size_t i = 0; i + 1 < b.rooms().size(); ++i) {
    b.add("=door_" + std::to_string(i + 1), "door", "door", {Affordance::openable}, {{"open", false}},
          RelationKind::in_room, b.rooms()[i].id);
  }
}

void add_connects(SceneGraph& g) {
  g.relations.insert({RelationKind::connects, std::string(kExitDoor), "room_1"});
  g.relations.insert({RelationKind::connects, std::string(kExitDoor), std::string(kOutside)});
  for (std::size_t i = 1; i < g.rooms.size() - 1; ++i) {
    const std::string door = "door_" + std::to_string(i);
    g.relations.insert({RelationKind::connects, door, "room_" + std::to_string(i)});
    g.relations.insert({RelationKind::connects, door, "room_" + std::to_string(i + 1)});
  }
}

ClueText lead_clue(SplitMix64& rng, const std::string& container_name, const std::string& container_role,
                   Veracity veracity) {
  return ClueText{fill(kLeadTemplates[rng.below(kLeadTemplates.size())], container_name), container_role,
                  std::nullopt, veracity};
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

// Exit key in a closed box, a note pointing at the box. Returns the key role.
std::string key_chain(Builder& b, SplitMix64& rng, const std::string& tag, bool hidden_note,
                      const std::string& note_room) {
  const std::string box_role = "#box_" + tag;
  const std::string key_role = "#key_" + tag;
  const std::string box_room = b.random_room();
  b.box(box_role, RelationKind::in_room, box_room);
  b.key(key_role, RelationKind::inside, box_role);
  ObjectNode& n = b.note("#note_" + tag, lead_clue(rng, b.name_of(box_role), box_role, Veracity::accurate),
                         RelationKind::in_room, note_room);
  if (hidden_note) {
    n.states["revealed"] = false;
  } else {
    b.place_loose("#note_" + tag, note_room);
  }
  return key_role;
}

// Three coloured statues and a pedestal whose arrangement reveals `reveals`.
void arrangement_puzzle(Builder& b, SplitMix64& rng, const std::string& room, const std::string& reveals) {
  std::vector<std::string> colours = kColours;
  rng.shuffle(colours);
  colours.resize(3);
  for (const auto& c : colours) {
    ObjectNode& s = b.add("#statue_" + c, "statue", c + " statue", {Affordance::movable}, {}, RelationKind::in_room,
                          room);
    s.color = c;
  }
  std::vector<std::string> order = colours;
  rng.shuffle(order);
  ObjectNode& pedestal =
      b.add("#pedestal", "pedestal", "stone pedestal", {Affordance::surface}, {}, RelationKind::in_room, room);
  pedestal.arrangement = ArrangementSpec{order, reveals};
  const std::string payload = join(order);
  std::string spoken;
  for (std::size_t i = 0; i < order.size(); ++i) spoken += (i ? ", " : "") + order[i];
  b.note("#note_order", ClueText{"Set the statues on the stone pedestal: " + spoken + ".", "#pedestal", payload,
                                 Veracity::accurate},
         RelationKind::in_room, room);
  b.place_loose("#note_order", room);
}

SceneGraph build_level(const LevelConfig& cfg, SplitMix64& rng) {
  Builder b(rng, cfg.effective_room_count());
  std::map<std::string, std::string> ids;
  switch (cfg.level) {
    case 1: {
      std::string key = key_chain(b, rng, "exit", false, b.random_room());
      add_doors(b, LockSpec{LockMechanism::key, key, std::nullopt});
      break;
    }
    case 2: {
      const std::string room = b.random_room();
      std::string key = key_chain(b, rng, "exit", true, room);
      arrangement_puzzle(b, rng, room, "#note_exit");
      add_doors(b, LockSpec{LockMechanism::key, key, std::nullopt});
      break;
    }
    case 3: {
      std::vector<std::string> rooms;
      for (const auto& r : b.rooms()) rooms.push_back(r.id);
      rng.shuffle(rooms);
      const std::string room_a = rooms[0];
      const std::string room_b = rooms[1];
      std::string code;
      for (int i = 0; i < cfg.code_length; ++i) code += static_cast<char>('0' + rng.below(10));
      // Puzzle A: note -> box holding a key -> locked box holding a fragment.
      b.box("#box_a", RelationKind::in_room, room_a);
      b.key("#key_a", RelationKind::inside, "#box_a");
      b.note("#note_a", lead_clue(rng, b.name_of("#box_a"), "#box_a", Veracity::accurate), RelationKind::in_room,
             room_a);
      b.place_loose("#note_a", room_a);
      ObjectNode& safe = b.box("#safe_a", RelationKind::in_room, room_a);
      safe.affordances.insert(Affordance::lockable);
      safe.states["locked"] = true;
      safe.lock = LockSpec{LockMechanism::key, "#key_a", std::nullopt};
      b.note("#frag_a", ClueText{"", "=" + std::string(kExitDoor), std::string{}, Veracity::accurate},
             RelationKind::inside, "#safe_a");
      // Puzzle B: arrangement reveals the second fragment.
      ObjectNode& frag_b = b.note("#frag_b", ClueText{"", "=" + std::string(kExitDoor), std::string{},
                                                      Veracity::accurate},
                                  RelationKind::in_room, room_b);
      frag_b.states["revealed"] = false;
      arrangement_puzzle(b, rng, room_b, "#frag_b");
      add_doors(b, LockSpec{LockMechanism::code, std::nullopt, code});
      b.decoys(cfg.decoy_objects);
      SceneGraph g = b.build(ids);
      // Halves go to the fragment notes in id order, matching how readers
      // assemble the code.
      std::string first = ids.at("#frag_a");
      std::string second = ids.at("#frag_b");
      if (second < first) std::swap(first, second);
      const std::size_t half = code.size() / 2;
      const std::string parts[2] = {code.substr(0, half), code.substr(half)};
      const std::string which[2] = {"first", "second"};
      const std::string* note_ids[2] = {&first, &second};
      for (int i = 0; i < 2; ++i) {
        ClueText& clue = *g.objects.at(*note_ids[i]).clue;
        clue.payload = parts[i];
        clue.text = "The " + which[i] + " part of the exit code is " + parts[i] + ".";
      }
      add_connects(g);
      return g;
    }
    case 4: {
      std::string key = key_chain(b, rng, "exit", false, b.random_room());
      const std::string decoy_room = b.random_room();
      b.box("#box_false", RelationKind::in_room, decoy_room);
      if (rng.coin()) b.key("#key_false", RelationKind::inside, "#box_false");
      const std::string note_room = b.random_room();
      b.note("#note_false", lead_clue(rng, b.name_of("#box_false"), "#box_false", Veracity::deceptive),
             RelationKind::in_room, note_room);
      b.place_loose("#note_false", note_room);
      add_doors(b, LockSpec{LockMechanism::key, key, std::nullopt});
      break;
    }
    default:
      throw Error(ErrorCode::InvalidConfig, "level must be 1..4");
  }
  b.decoys(cfg.decoy_objects);
  SceneGraph g = b.build(ids);
  add_connects(g);
  return g;
}

}  // namespace

int LevelConfig::effective_room_count() const {
  if (room_count > 0) return room_count;
  return level <= 2 ? 1 : 2;
}

void validate_config(const LevelConfig& cfg) {
  if (cfg.level < 1 || cfg.level > 4) throw Error(ErrorCode::InvalidConfig, "level must be 1..4", "/level");
  const int rooms = cfg.effective_room_count();
  if (rooms < 1 || rooms > 4) throw Error(ErrorCode::InvalidConfig, "room_count must be 1..4", "/room_count");
  if (cfg.level == 3 && rooms < 2) {
    throw Error(ErrorCode::InvalidConfig, "level 3 puts its two puzzles in separate rooms", "/room_count");
  }
  if (cfg.decoy_objects < 0 || cfg.decoy_objects > 12) {
    throw Error(ErrorCode::InvalidConfig, "decoy_objects must be 0..12", "/decoy_objects");
  }
  if (cfg.code_length < 2 || cfg.code_length > 8) {
    throw Error(ErrorCode::InvalidConfig, "code_length must be 2..8", "/code_length");
  }
}

GoalSpec escape_goal() {
  GoalSpec g;
  g.conjuncts.push_back({PredicateKind::door_open, std::string(kExitDoor), "", "", true});
  g.description = "Open the exit door.";
  return g;
}

GeneratedRoom generate(const LevelConfig& config) {
  validate_config(config);
  std::string last_reason = "no attempt";
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    SplitMix64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(attempt) * 16 + config.level));
    SceneGraph g = build_level(config, rng);
    if (auto v = check_invariants(g); !v.empty()) {
      last_reason = "invariant " + v.front().kind + ": " + v.front().detail;
      continue;
    }
    GeneratedRoom room;
    room.goal = escape_goal();
    SolveResult solved = solve(g, room.goal);
    if (solved.status != SolveStatus::solved || solved.plan.empty()) {
      last_reason = std::string("solver: ") + std::string(to_string(solved.status));
      continue;
    }
    room.graph = std::move(g);
    room.certificate.plan = std::move(solved.plan);
    room.certificate.optimal_length = static_cast<int>(room.certificate.plan.size());
    room.level = config.level;
    room.seed = config.seed;
    if (!verify(room).ok) {
      last_reason = "certificate replay failed";
      continue;
    }
    return room;
  }
  throw Error(ErrorCode::GenerationFailure, "retry budget exhausted (" + last_reason + ")");
}

VerifyResult verify(const SceneGraph& graph, const GoalSpec& goal, const std::vector<Move>& plan) {
  VerifyResult r;
  SceneGraph g = graph;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& [agent, action] = plan[i];
    if (!g.agent(agent)) {
      r.ok = false;
      r.failed_step = i;
      r.detail = "unknown agent '" + agent + "'";
      return r;
    }
    Outcome o = apply_in_place(g, agent, action);
    if (!o.ok) {
      r.ok = false;
      r.failed_step = i;
      r.detail = describe(action) + " rejected: " + std::string(to_string(o.reason->code));
      return r;
    }
  }
  if (!goal_holds(g, goal)) {
    r.ok = false;
    r.failed_step = plan.size();
    r.detail = "goal not satisfied after the last step";
  }
  return r;
}

VerifyResult verify(const GeneratedRoom& room) { return verify(room.graph, room.goal, room.certificate.plan); }

json to_json(const LevelConfig& cfg) {
  return {{"level", cfg.level},
          {"seed", cfg.seed},
          {"room_count", cfg.effective_room_count()},
          {"decoy_objects", cfg.decoy_objects},
          {"code_length", cfg.code_length}};
}

LevelConfig level_config_from_json(const json& doc, const std::string& path) {
  detail::check_keys(doc, path, {"level"}, {"seed", "room_count", "decoy_objects", "code_length"});
  LevelConfig cfg;
  cfg.level = detail::get_int(doc, "level", path);
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      throw schema_error(path + "/seed", "expected non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("room_count")) cfg.room_count = detail::get_int(doc, "room_count", path);
  if (doc.contains("decoy_objects")) cfg.decoy_objects = detail::get_int(doc, "decoy_objects", path);
  if (doc.contains("code_length")) cfg.code_length = detail::get_int(doc, "code_length", path);
  return cfg;
}

json to_json(const Move& move) { return {{"agent", move.first}, {"action", to_json(move.second)}}; }

Move move_from_json(const json& doc, const std::string& path) {
  detail::check_keys(doc, path, {"agent", "action"}, {});
  return {detail::get_id(doc, "agent", path), action_from_json(doc.at("action"), path + "/action")};
}

json to_json(const SolutionCertificate& cert) {
  json plan = json::array();
  for (const auto& m : cert.plan) plan.push_back(to_json(m));
  return {{"plan", plan}, {"optimal_length", cert.optimal_length}};
}

json to_json(const GeneratedRoom& room) {
  return {{"level", room.level},
          {"seed", room.seed},
          {"graph", to_json(room.graph)},
          {"goal", to_json(room.goal)},
          {"certificate", to_json(room.certificate)}};
}

GeneratedRoom generated_room_from_json(const json& doc) {
  detail::check_keys(doc, "", {"graph", "goal"}, {"level", "seed", "certificate"});
  GeneratedRoom room;
  room.graph = scene_graph_from_json(doc.at("graph"));
  room.goal = goal_from_json(doc.at("goal"), "/goal");
  if (doc.contains("level")) room.level = detail::get_int(doc, "level", "");
  if (doc.contains("seed")) room.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("certificate")) {
    const auto& c = doc.at("certificate");
    detail::check_keys(c, "/certificate", {"plan"}, {"optimal_length"});
    const auto& plan = detail::get_array(c, "plan", "/certificate");
    for (std::size_t i = 0; i < plan.size(); ++i) {
      room.certificate.plan.push_back(move_from_json(plan[i], "/certificate/plan/" + std::to_string(i)));
    }
    room.certificate.optimal_length = static_cast<int>(room.certificate.plan.size());
  }
  return room;
}

}  // namespace vsim
