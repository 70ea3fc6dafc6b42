#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "vsim/scene_graph.hpp"

namespace vsim {

// Facts an agent can infer from the clues it has read.
//
// Inference rules, applied per read clue in reading order:
//  * referent is a code-locked object and the clue has a payload
//      -> code fragment for that lock; the full code is the concatenation of
//         fragments ordered by the clue object's id
//  * referent carries an arrangement and the clue has a payload
//      -> colour order for that surface (payload split on ',')
//  * any other referent -> lead: "what you need is at <referent>"
// Deceptive clues produce leads like any other; nothing marks them. The
// false lead is only exposed by what the world shows when it is followed.
struct KnowledgeState {
  std::set<std::string> leads;
  std::map<std::string, std::map<std::string, std::string>> code_fragments;  // lock -> clue id -> payload
  std::map<std::string, std::vector<std::string>> orders;                    // surface -> colours

  std::map<std::string, std::string> codes() const;
};

KnowledgeState derive_knowledge(const SceneGraph& graph, const std::vector<ReadClue>& read_clues);
KnowledgeState derive_knowledge(const SceneGraph& graph, const std::string& agent_id);

std::vector<std::string> split_order(const std::string& payload);

}  // namespace vsim
