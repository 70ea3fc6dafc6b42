#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vsim/action_engine.hpp"
#include "vsim/goal.hpp"
#include "vsim/scene_graph.hpp"
#include "vsim/solver.hpp"

namespace vsim {

inline constexpr std::string_view kExitDoor = "door_exit";
inline constexpr std::string_view kOutside = "outside";

struct LevelConfig {
  int level = 1;
  std::uint64_t seed = 0;
  int room_count = 0;  // 0: level default (1, 1, 2, 2)
  int decoy_objects = 3;
  int code_length = 4;

  int effective_room_count() const;
};

// Throws InvalidConfig.
void validate_config(const LevelConfig& cfg);

struct SolutionCertificate {
  std::vector<Move> plan;
  int optimal_length = 0;
};

struct GeneratedRoom {
  SceneGraph graph;
  GoalSpec goal;
  SolutionCertificate certificate;
  int level = 1;
  std::uint64_t seed = 0;
};

// Deterministic in (config). Throws InvalidConfig, GenerationFailure.
GeneratedRoom generate(const LevelConfig& config);

struct VerifyResult {
  bool ok = true;
  // First failing plan index; plan.size() when every step applied but the
  // goal does not hold at the end.
  std::optional<std::size_t> failed_step;
  std::string detail;
};

VerifyResult verify(const GeneratedRoom& room);
VerifyResult verify(const SceneGraph& graph, const GoalSpec& goal, const std::vector<Move>& plan);

GoalSpec escape_goal();

json to_json(const LevelConfig& cfg);
LevelConfig level_config_from_json(const json& doc, const std::string& path = "");
json to_json(const SolutionCertificate& cert);
json to_json(const GeneratedRoom& room);
GeneratedRoom generated_room_from_json(const json& doc);
json to_json(const Move& move);
Move move_from_json(const json& doc, const std::string& path);

}  // namespace vsim
