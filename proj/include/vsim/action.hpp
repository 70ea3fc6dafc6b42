#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vsim/scene_graph.hpp"

namespace vsim {

namespace act {

struct GoTo {
  std::string room;
  bool operator==(const GoTo&) const = default;
};
struct Open {
  std::string object;
  bool operator==(const Open&) const = default;
};
struct Close {
  std::string object;
  bool operator==(const Close&) const = default;
};
struct PickUp {
  std::string object;
  bool operator==(const PickUp&) const = default;
};
enum class PlaceRelation { inside, on_top };
struct Place {
  std::string object;
  PlaceRelation relation = PlaceRelation::on_top;
  std::string target;
  bool operator==(const Place&) const = default;
};
// Exactly one of key / code is set.
struct Unlock {
  std::string object;
  std::optional<std::string> key;
  std::optional<std::string> code;
  bool operator==(const Unlock&) const = default;
};
struct Lock {
  std::string object;
  bool operator==(const Lock&) const = default;
};
struct Read {
  std::string object;
  bool operator==(const Read&) const = default;
};
struct Toggle {
  std::string object;
  bool operator==(const Toggle&) const = default;
};
struct Arrange {
  std::vector<std::string> objects;
  std::string target;
  bool operator==(const Arrange&) const = default;
};
// Harness-level no-op. Never enumerated by legal_actions.
struct Wait {
  bool operator==(const Wait&) const = default;
};

}  // namespace act

using Action = std::variant<act::GoTo, act::Open, act::Close, act::PickUp, act::Place, act::Unlock, act::Lock,
                            act::Read, act::Toggle, act::Arrange, act::Wait>;

std::string_view action_type(const Action& a);
json to_json(const Action& a);
// Throws SchemaError (path relative to `path`) on malformed wire objects.
Action action_from_json(const json& doc, const std::string& path = "");
std::string describe(const Action& a);
// Object and room ids the action refers to, in field order.
std::vector<std::string> action_ids(const Action& a);
// The id an action is "about": the manipulated object, or the room for GoTo.
std::string primary_target(const Action& a);

enum class PreconditionCode {
  unknown_object,
  wrong_room,
  locked,
  closed_container,
  not_held,
  hands_full,
  not_affordant,
  wrong_key,
  wrong_code,
  invalid_target,
};

std::string_view to_string(PreconditionCode c);
std::optional<PreconditionCode> parse_precondition_code(std::string_view s);

struct PreconditionError {
  PreconditionCode code;
  std::string detail;
  bool operator==(const PreconditionError&) const = default;
};

enum class EventKind { moved, opened, closed, picked_up, placed, unlocked, locked, clue_read, toggled, arranged, revealed };

std::string_view to_string(EventKind k);

struct Event {
  EventKind kind;
  std::string object;
  std::optional<ClueText> clue;
  bool operator==(const Event&) const = default;
};

struct Outcome {
  bool ok = true;
  std::optional<PreconditionError> reason;
  std::vector<Event> events;
  bool operator==(const Outcome&) const = default;
};

json to_json(const PreconditionError& e);
// Clue events carry what the reader sees (text, referent, payload).
json to_json(const Outcome& o);
// Event clues come back with veracity left at its default.
Outcome outcome_from_json(const json& doc, const std::string& path = "");

}  // namespace vsim
