#include "vsim/knowledge.hpp"

#include <sstream>

namespace vsim {

std::vector<std::string> split_order(const std::string& payload) {
  std::vector<std::string> out;
  std::stringstream ss(payload);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(' ');
    auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::map<std::string, std::string> KnowledgeState::codes() const {
  std::map<std::string, std::string> out;
  for (const auto& [lock, fragments] : code_fragments) {
    std::string code;
    for (const auto& [clue_id, payload] : fragments) {
      (void)clue_id;
      code += payload;
    }
    out[lock] = code;
  }
  return out;
}

KnowledgeState derive_knowledge(const SceneGraph& graph, const std::vector<ReadClue>& read_clues) {
  KnowledgeState k;
  for (const auto& rc : read_clues) {
    if (!rc.clue.referent) continue;
    const std::string& ref = *rc.clue.referent;
    const ObjectNode* target = graph.object(ref);
    if (rc.clue.payload && target && target->lock && target->lock->mechanism == LockMechanism::code) {
      k.code_fragments[ref][rc.object_id] = *rc.clue.payload;
    } else if (rc.clue.payload && target && target->arrangement) {
      k.orders[ref] = split_order(*rc.clue.payload);
    } else {
      k.leads.insert(ref);
    }
  }
  return k;
}

KnowledgeState derive_knowledge(const SceneGraph& graph, const std::string& agent_id) {
  const AgentNode* a = graph.agent(agent_id);
  if (!a) return {};
  return derive_knowledge(graph, a->read_clues);
}

}  // namespace vsim
