#include "toolpath/subgraph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace toolpath {

std::string ToolSubgraph::Node::label() const {
    if (is_start) return "start";
    return tool + "@" + std::to_string(subtask.ordinal);
}

bool ToolSubgraph::is_leaf(int idx) const {
    return std::find(leaves.begin(), leaves.end(), idx) != leaves.end();
}

std::vector<int> ToolSubgraph::topological_order() const {
    std::vector<int> indeg(nodes.size(), 0);
    for (const auto& outs : adj)
        for (int v : outs) indeg[static_cast<size_t>(v)]++;
    std::deque<int> ready;
    for (size_t i = 0; i < nodes.size(); ++i)
        if (indeg[i] == 0) ready.push_back(static_cast<int>(i));
    std::vector<int> order;
    while (!ready.empty()) {
        int u = ready.front();
        ready.pop_front();
        order.push_back(u);
        for (int v : adj[static_cast<size_t>(u)])
            if (--indeg[static_cast<size_t>(v)] == 0) ready.push_back(v);
    }
    if (order.size() != nodes.size())
        throw CyclicDependencyGraph("tool subgraph unexpectedly contains a cycle");
    return order;
}

std::string ToolSubgraph::dump_json() const {
    std::ostringstream os;
    os << "{\"nodes\":[";
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (i) os << ",";
        os << "\"" << nodes[i].label() << "\"";
    }
    os << "],\"edges\":{";
    bool first = true;
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (!first) os << ",";
        first = false;
        os << "\"" << nodes[i].label() << "\":[";
        for (size_t k = 0; k < adj[i].size(); ++k) {
            if (k) os << ",";
            os << "\"" << nodes[static_cast<size_t>(adj[i][k])].label() << "\"";
        }
        os << "]";
    }
    os << "},\"leaves\":[";
    for (size_t i = 0; i < leaves.size(); ++i) {
        if (i) os << ",";
        os << "\"" << nodes[static_cast<size_t>(leaves[i])].label() << "\"";
    }
    os << "]}";
    return os.str();
}

std::vector<ToolId> tools_for_subtask(const SubtaskType& kind, const ModelDescriptionTable& mdt) {
    std::vector<ToolId> out;
    for (const auto& [tool, entry] : mdt.entries)
        if (entry.supported_subtasks.count(kind)) out.push_back(tool);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// ancestor closure of the capable terminals along family-compatible edges
std::set<ToolId> prerequisite_closure(const std::vector<ToolId>& terminals,
                                      const ToolDependencyGraph& tdg, SubtaskFamily family) {
    std::set<ToolId> included(terminals.begin(), terminals.end());
    std::deque<ToolId> frontier(terminals.begin(), terminals.end());
    while (!frontier.empty()) {
        ToolId t = frontier.front();
        frontier.pop_front();
        for (const auto& pred : tdg.predecessors(t, family))
            if (included.insert(pred).second) frontier.push_back(pred);
    }
    return included;
}

// builds the per-subtask node/edge structure into `g`, returning the node
// indices of sources (no in-edges) and terminals
struct SubtaskPiece {
    std::vector<int> sources;
    std::vector<int> terminals;
};

SubtaskPiece append_subtask_piece(ToolSubgraph& g, const SubtaskInstance& s,
                                  const KnowledgeBase& kb) {
    auto capable = tools_for_subtask(s.kind, kb.mdt);
    if (capable.empty()) throw NoCapableTool("no tool supports subtask kind: " + s.kind);

    SubtaskFamily family = kb.catalog.subtask(s.kind).family;
    std::set<ToolId> included = prerequisite_closure(capable, kb.tdg, family);

    std::map<ToolId, int> index;
    for (const auto& tool : included) {  // set order keeps node layout deterministic
        ToolSubgraph::Node node;
        node.tool = tool;
        node.subtask = s;
        index[tool] = static_cast<int>(g.nodes.size());
        g.nodes.push_back(std::move(node));
        g.adj.emplace_back();
        g.radj.emplace_back();
    }
    for (const auto& e : kb.tdg.edges) {
        if (!e.applies_to(family)) continue;
        auto fi = index.find(e.from);
        auto ti = index.find(e.to);
        if (fi == index.end() || ti == index.end()) continue;
        g.adj[static_cast<size_t>(fi->second)].push_back(ti->second);
        g.radj[static_cast<size_t>(ti->second)].push_back(fi->second);
    }

    SubtaskPiece piece;
    for (const auto& [tool, idx] : index)
        if (g.radj[static_cast<size_t>(idx)].empty()) piece.sources.push_back(idx);
    for (const auto& tool : capable) piece.terminals.push_back(index.at(tool));
    std::sort(piece.terminals.begin(), piece.terminals.end());
    return piece;
}

void sort_edges(ToolSubgraph& g) {
    for (auto& outs : g.adj) std::sort(outs.begin(), outs.end());
    for (auto& ins : g.radj) std::sort(ins.begin(), ins.end());
}

}  // namespace

ToolSubgraph build_low_level_subgraph(const SubtaskInstance& s, const KnowledgeBase& kb) {
    ToolSubgraph g;
    g.nodes.push_back(ToolSubgraph::Node{"", {}, true});
    g.adj.emplace_back();
    g.radj.emplace_back();

    SubtaskPiece piece = append_subtask_piece(g, s, kb);
    for (int src : piece.sources) {
        g.adj[0].push_back(src);
        g.radj[static_cast<size_t>(src)].push_back(0);
    }
    g.leaves = piece.terminals;
    sort_edges(g);
    return g;
}

ToolSubgraph build_full_subgraph(const SubtaskChain& chain, const KnowledgeBase& kb) {
    if (chain.entries.empty()) throw ValidationError("cannot build a subgraph for an empty chain");
    ToolSubgraph g;
    g.nodes.push_back(ToolSubgraph::Node{"", {}, true});
    g.adj.emplace_back();
    g.radj.emplace_back();

    std::vector<int> previous_exits{0};  // start feeds the first subtask
    for (const auto& entry : chain.entries) {
        SubtaskPiece piece = append_subtask_piece(g, entry, kb);
        for (int exit : previous_exits)
            for (int src : piece.sources) {
                g.adj[static_cast<size_t>(exit)].push_back(src);
                g.radj[static_cast<size_t>(src)].push_back(exit);
            }
        previous_exits = piece.terminals;
    }
    g.leaves = previous_exits;
    sort_edges(g);
    return g;
}

}  // namespace toolpath
