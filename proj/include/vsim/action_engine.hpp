#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vsim/action.hpp"
#include "vsim/scene_graph.hpp"

namespace vsim {

// Pure check. Throws UnknownAgent; every other failure is returned.
std::optional<PreconditionError> validate(const SceneGraph& graph, const std::string& agent_id, const Action& action);

struct ApplyResult {
  SceneGraph graph;
  Outcome outcome;
};

ApplyResult apply(SceneGraph graph, const std::string& agent_id, const Action& action);
// In-place variant; on rejection the graph is untouched.
Outcome apply_in_place(SceneGraph& graph, const std::string& agent_id, const Action& action);

// Candidate actions in canonical order (action class, then ids). With
// `whole_graph` the candidates range over every node instead of only what
// the agent can perceive; used to cross-check legal_actions. Code unlocks
// are drawn from the codes the agent can derive from its read clues.
std::vector<Action> candidate_actions(const SceneGraph& graph, const std::string& agent_id, bool whole_graph);

std::vector<Action> legal_actions(const SceneGraph& graph, const std::string& agent_id);

using Move = std::pair<std::string, Action>;

struct StepResult {
  SceneGraph graph;
  std::vector<Outcome> outcomes;
};

// Sequential application in submission order. Throws DuplicateAgent.
StepResult step_multi(SceneGraph graph, const std::vector<Move>& moves);

}  // namespace vsim
