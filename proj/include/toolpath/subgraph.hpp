#pragma once

#include <string>
#include <vector>

#include "toolpath/domain.hpp"

namespace toolpath {

// Search space for the slow planner. Nodes are (tool, subtask-instance)
// pairs — the same tool serving two subtasks is two nodes with independent
// accumulated scores — plus one distinguished start node at index 0.
struct ToolSubgraph {
    struct Node {
        ToolId tool;
        SubtaskInstance subtask;
        bool is_start = false;

        std::string label() const;  // "tool@ordinal", start prints "start"
    };

    std::vector<Node> nodes;               // index 0 is the start node
    std::vector<std::vector<int>> adj;     // out-edges
    std::vector<std::vector<int>> radj;    // in-edges
    std::vector<int> leaves;               // nodes completing the final subtask

    bool is_leaf(int idx) const;
    std::vector<int> topological_order() const;  // start first
    std::string dump_json() const;               // adjacency list, labeled
};

// All MDT entries listing `kind` among their supported subtasks.
std::vector<ToolId> tools_for_subtask(const SubtaskType& kind, const ModelDescriptionTable& mdt);

// Every path from start through family-compatible prerequisite tools to each
// capable terminal tool; minimal (each node lies on some start->leaf path).
ToolSubgraph build_low_level_subgraph(const SubtaskInstance& s, const KnowledgeBase& kb);

// Per-subtask subgraphs concatenated in chain order; each subgraph's leaves
// feed the successor subgraph's entry nodes.
ToolSubgraph build_full_subgraph(const SubtaskChain& chain, const KnowledgeBase& kb);

}  // namespace toolpath
