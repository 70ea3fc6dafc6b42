#include "vsim/action.hpp"

#include <algorithm>

#include "vsim/error.hpp"

namespace vsim {

namespace {

constexpr std::string_view kCodeNames[] = {"unknown_object", "wrong_room",    "locked",    "closed_container",
                                           "not_held",       "hands_full",    "not_affordant", "wrong_key",
                                           "wrong_code",     "invalid_target"};
constexpr std::string_view kEventNames[] = {"moved",    "opened",    "closed",  "picked_up", "placed",  "unlocked",
                                            "locked",   "clue_read", "toggled", "arranged",  "revealed"};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_keys(const json& doc, const std::string& path, std::initializer_list<std::string_view> keys,
                  std::initializer_list<std::string_view> optional = {}) {
  for (auto k : keys) {
    if (!doc.contains(std::string(k))) throw schema_error(path + "/" + std::string(k), "missing required key");
  }
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key == "type") continue;
    if (std::find(keys.begin(), keys.end(), key) == keys.end() &&
        std::find(optional.begin(), optional.end(), key) == optional.end()) {
      throw schema_error(path + "/" + key, "unknown key");
    }
  }
}

std::string id_field(const json& doc, const std::string& key, const std::string& path) {
  const auto& v = doc.at(key);
  if (!v.is_string() || !is_valid_identifier(v.get<std::string>())) {
    throw schema_error(path + "/" + key, "expected identifier");
  }
  return v.get<std::string>();
}

}  // namespace

std::string_view to_string(PreconditionCode c) { return kCodeNames[static_cast<int>(c)]; }

std::optional<PreconditionCode> parse_precondition_code(std::string_view s) {
  for (int i = 0; i < 10; ++i) {
    if (kCodeNames[i] == s) return static_cast<PreconditionCode>(i);
  }
  return std::nullopt;
}

std::string_view to_string(EventKind k) { return kEventNames[static_cast<int>(k)]; }

std::string_view action_type(const Action& a) {
  return std::visit(overloaded{
                        [](const act::GoTo&) { return std::string_view("go_to"); },
                        [](const act::Open&) { return std::string_view("open"); },
                        [](const act::Close&) { return std::string_view("close"); },
                        [](const act::PickUp&) { return std::string_view("pick_up"); },
                        [](const act::Place&) { return std::string_view("place"); },
                        [](const act::Unlock&) { return std::string_view("unlock"); },
                        [](const act::Lock&) { return std::string_view("lock"); },
                        [](const act::Read&) { return std::string_view("read"); },
                        [](const act::Toggle&) { return std::string_view("toggle"); },
                        [](const act::Arrange&) { return std::string_view("arrange"); },
                        [](const act::Wait&) { return std::string_view("wait"); },
                    },
                    a);
}

json to_json(const Action& a) {
  json j = {{"type", action_type(a)}};
  std::visit(overloaded{
                 [&](const act::GoTo& x) { j["room"] = x.room; },
                 [&](const act::Open& x) { j["object"] = x.object; },
                 [&](const act::Close& x) { j["object"] = x.object; },
                 [&](const act::PickUp& x) { j["object"] = x.object; },
                 [&](const act::Place& x) {
                   j["object"] = x.object;
                   j["relation"] = x.relation == act::PlaceRelation::inside ? "inside" : "on_top";
                   j["target"] = x.target;
                 },
                 [&](const act::Unlock& x) {
                   j["object"] = x.object;
                   if (x.key) j["key"] = *x.key;
                   if (x.code) j["code"] = *x.code;
                 },
                 [&](const act::Lock& x) { j["object"] = x.object; },
                 [&](const act::Read& x) { j["object"] = x.object; },
                 [&](const act::Toggle& x) { j["object"] = x.object; },
                 [&](const act::Arrange& x) {
                   j["objects"] = x.objects;
                   j["target"] = x.target;
                 },
                 [&](const act::Wait&) {},
             },
             a);
  return j;
}

Action action_from_json(const json& doc, const std::string& path) {
  if (!doc.is_object()) throw schema_error(path.empty() ? "/" : path, "expected action object");
  if (!doc.contains("type") || !doc.at("type").is_string()) throw schema_error(path + "/type", "missing type");
  const std::string type = doc.at("type").get<std::string>();
  auto single = [&](auto tag) {
    require_keys(doc, path, {"object"});
    decltype(tag) a;
    a.object = id_field(doc, "object", path);
    return Action(a);
  };
  if (type == "go_to") {
    require_keys(doc, path, {"room"});
    return act::GoTo{id_field(doc, "room", path)};
  }
  if (type == "open") return single(act::Open{});
  if (type == "close") return single(act::Close{});
  if (type == "pick_up") return single(act::PickUp{});
  if (type == "lock") return single(act::Lock{});
  if (type == "read") return single(act::Read{});
  if (type == "toggle") return single(act::Toggle{});
  if (type == "place") {
    require_keys(doc, path, {"object", "relation", "target"});
    act::Place p;
    p.object = id_field(doc, "object", path);
    p.target = id_field(doc, "target", path);
    const auto& rel = doc.at("relation");
    if (rel == "inside") p.relation = act::PlaceRelation::inside;
    else if (rel == "on_top") p.relation = act::PlaceRelation::on_top;
    else throw schema_error(path + "/relation", "expected inside|on_top");
    return p;
  }
  if (type == "unlock") {
    require_keys(doc, path, {"object"}, {"key", "code"});
    act::Unlock u;
    u.object = id_field(doc, "object", path);
    if (doc.contains("key")) u.key = id_field(doc, "key", path);
    if (doc.contains("code")) {
      const auto& c = doc.at("code");
      if (!c.is_string() || c.get<std::string>().empty()) throw schema_error(path + "/code", "expected digit string");
      u.code = c.get<std::string>();
    }
    if (u.key.has_value() == u.code.has_value()) throw schema_error(path, "unlock needs exactly one of key, code");
    return u;
  }
  if (type == "arrange") {
    require_keys(doc, path, {"objects", "target"});
    act::Arrange a;
    const auto& objs = doc.at("objects");
    if (!objs.is_array() || objs.empty()) throw schema_error(path + "/objects", "expected non-empty array");
    for (std::size_t i = 0; i < objs.size(); ++i) {
      if (!objs[i].is_string() || !is_valid_identifier(objs[i].get<std::string>())) {
        throw schema_error(path + "/objects/" + std::to_string(i), "expected identifier");
      }
      a.objects.push_back(objs[i].get<std::string>());
    }
    a.target = id_field(doc, "target", path);
    return a;
  }
  if (type == "wait") {
    require_keys(doc, path, {});
    return act::Wait{};
  }
  throw schema_error(path + "/type", "unknown action type '" + type + "'");
}

std::vector<std::string> action_ids(const Action& a) {
  return std::visit(overloaded{
                        [](const act::GoTo& x) { return std::vector<std::string>{x.room}; },
                        [](const act::Place& x) { return std::vector<std::string>{x.object, x.target}; },
                        [](const act::Unlock& x) {
                          std::vector<std::string> v{x.object};
                          if (x.key) v.push_back(*x.key);
                          return v;
                        },
                        [](const act::Arrange& x) {
                          std::vector<std::string> v = x.objects;
                          v.push_back(x.target);
                          return v;
                        },
                        [](const act::Wait&) { return std::vector<std::string>{}; },
                        [](const auto& x) { return std::vector<std::string>{x.object}; },
                    },
                    a);
}

std::string primary_target(const Action& a) {
  return std::visit(overloaded{
                        [](const act::GoTo& x) { return x.room; },
                        [](const act::Arrange& x) { return x.target; },
                        [](const act::Wait&) { return std::string{}; },
                        [](const auto& x) { return x.object; },
                    },
                    a);
}

std::string describe(const Action& a) {
  std::string out(action_type(a));
  out += "(";
  auto ids = action_ids(a);
  if (const auto* u = std::get_if<act::Unlock>(&a); u && u->code) ids.push_back("code=" + *u->code);
  if (const auto* p = std::get_if<act::Place>(&a)) {
    ids = {p->object, p->relation == act::PlaceRelation::inside ? "inside" : "on_top", p->target};
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ",";
    out += ids[i];
  }
  return out + ")";
}

json to_json(const PreconditionError& e) { return {{"code", to_string(e.code)}, {"detail", e.detail}}; }

json to_json(const Outcome& o) {
  json events = json::array();
  for (const auto& e : o.events) {
    json j = {{"kind", to_string(e.kind)}, {"object", e.object}};
    if (e.clue) {
      // What the reader sees; veracity stays in the graph.
      json c = {{"text", e.clue->text}};
      if (e.clue->referent) c["referent"] = *e.clue->referent;
      if (e.clue->payload) c["payload"] = *e.clue->payload;
      j["clue"] = std::move(c);
    }
    events.push_back(std::move(j));
  }
  json j = {{"status", o.ok ? "ok" : "rejected"}, {"events", events}};
  if (o.reason) j["reason"] = to_json(*o.reason);
  return j;
}

Outcome outcome_from_json(const json& doc, const std::string& path) {
  require_keys(doc, path, {"status", "events"}, {"reason"});
  Outcome o;
  const std::string status = doc.at("status").is_string() ? doc.at("status").get<std::string>() : "";
  if (status != "ok" && status != "rejected") throw schema_error(path + "/status", "expected ok|rejected");
  o.ok = status == "ok";
  if (doc.contains("reason")) {
    const json& r = doc.at("reason");
    require_keys(r, path + "/reason", {"code", "detail"});
    auto code = r.at("code").is_string() ? parse_precondition_code(r.at("code").get<std::string>()) : std::nullopt;
    if (!code) throw schema_error(path + "/reason/code", "unknown precondition code");
    o.reason = PreconditionError{*code, r.at("detail").get<std::string>()};
  }
  if (!doc.at("events").is_array()) throw schema_error(path + "/events", "expected array");
  for (std::size_t i = 0; i < doc.at("events").size(); ++i) {
    const json& e = doc.at("events")[i];
    const std::string ep = path + "/events/" + std::to_string(i);
    require_keys(e, ep, {"kind", "object"}, {"clue"});
    const std::string kind = e.at("kind").get<std::string>();
    auto it = std::find(std::begin(kEventNames), std::end(kEventNames), kind);
    if (it == std::end(kEventNames)) throw schema_error(ep + "/kind", "unknown event kind");
    Event ev{static_cast<EventKind>(it - std::begin(kEventNames)), e.at("object").get<std::string>(), std::nullopt};
    if (e.contains("clue")) {
      const json& c = e.at("clue");
      require_keys(c, ep + "/clue", {"text"}, {"referent", "payload"});
      ClueText clue;
      clue.text = c.at("text").get<std::string>();
      if (c.contains("referent")) clue.referent = c.at("referent").get<std::string>();
      if (c.contains("payload")) clue.payload = c.at("payload").get<std::string>();
      ev.clue = std::move(clue);
    }
    o.events.push_back(std::move(ev));
  }
  return o;
}

}  // namespace vsim
