#include "toolpath/domain.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "toolpath/subgraph.hpp"

namespace toolpath {

bool FeatureCatalog::has_subtask(const SubtaskType& s) const {
    return std::any_of(subtasks.begin(), subtasks.end(),
                       [&](const SubtaskDef& d) { return d.name == s; });
}

const FeatureCatalog::SubtaskDef& FeatureCatalog::subtask(const SubtaskType& s) const {
    for (const auto& d : subtasks)
        if (d.name == s) return d;
    throw ValidationError("unknown subtask kind: " + s);
}

bool FeatureCatalog::has_feature(const std::string& name) const {
    return feature_domains.count(name) > 0;
}

bool FeatureCatalog::bucket_in_domain(const std::string& feature, const std::string& value) const {
    auto it = feature_domains.find(feature);
    if (it == feature_domains.end()) return false;
    return std::find(it->second.begin(), it->second.end(), value) != it->second.end();
}

std::string SubtaskInstance::label() const {
    std::ostringstream os;
    os << kind << " (";
    if (!source_object.empty()) {
        os << source_object;
        if (!target_object.empty()) os << " -> " << target_object;
    }
    os << ")(" << ordinal << ")";
    return os.str();
}

std::optional<std::string> ContextFeatures::get(const std::string& feature) const {
    auto it = values.find(feature);
    if (it == values.end()) return std::nullopt;
    return it->second;
}

void ContextFeatures::validate(const FeatureCatalog& catalog) const {
    for (const auto& [name, value] : values) {
        if (!catalog.has_feature(name))
            throw ValidationError("undeclared context feature: " + name);
        if (!catalog.bucket_in_domain(name, value))
            throw ValidationError("value '" + value + "' outside the declared domain of feature '" +
                                  name + "'");
    }
}

void ToolDependencyGraph::validate() const {
    for (const auto& e : edges) {
        if (!nodes.count(e.from))
            throw DanglingToolReference("dependency edge names unknown tool: " + e.from);
        if (!nodes.count(e.to))
            throw DanglingToolReference("dependency edge names unknown tool: " + e.to);
    }
    // Kahn over all edges (family tags do not affect acyclicity)
    std::map<ToolId, int> indeg;
    for (const auto& n : nodes) indeg[n] = 0;
    for (const auto& e : edges) indeg[e.to]++;
    std::deque<ToolId> ready;
    for (const auto& [n, d] : indeg)
        if (d == 0) ready.push_back(n);
    size_t seen = 0;
    while (!ready.empty()) {
        ToolId n = ready.front();
        ready.pop_front();
        ++seen;
        for (const auto& e : edges)
            if (e.from == n && --indeg[e.to] == 0) ready.push_back(e.to);
    }
    if (seen != nodes.size()) throw CyclicDependencyGraph("tool dependency graph contains a cycle");
}

std::vector<ToolId> ToolDependencyGraph::predecessors(const ToolId& tool,
                                                      SubtaskFamily family) const {
    std::vector<ToolId> out;
    for (const auto& e : edges)
        if (e.to == tool && e.applies_to(family)) out.push_back(e.from);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const BenchmarkTable::Entry& BenchmarkTable::at(const ToolId& tool,
                                                const SubtaskType& subtask) const {
    auto it = entries.find({tool, subtask});
    if (it == entries.end())
        throw MissingBenchmarkEntry("no benchmark entry for (" + tool + ", " + subtask + ")");
    return it->second;
}

bool BenchmarkTable::has(const ToolId& tool, const SubtaskType& subtask) const {
    return entries.count({tool, subtask}) > 0;
}

const WorldState::Object* WorldState::find(const std::string& name) const {
    for (const auto& o : objects)
        if (o.name == name) return &o;
    return nullptr;
}

WorldState::Object* WorldState::find(const std::string& name) {
    for (auto& o : objects)
        if (o.name == name) return &o;
    return nullptr;
}

void apply_subtask_effect(WorldState& state, const SubtaskInstance& s, const ToolId& terminal,
                          const FeatureCatalog& catalog) {
    using Effect = FeatureCatalog::SubtaskDef::Effect;
    const auto& def = catalog.subtask(s.kind);
    switch (def.effect) {
        case Effect::DeleteSource:
            state.objects.erase(std::remove_if(state.objects.begin(), state.objects.end(),
                                               [&](const WorldState::Object& o) {
                                                   return o.name == s.source_object;
                                               }),
                                state.objects.end());
            break;
        case Effect::RenameSource:
            if (auto* obj = state.find(s.source_object)) {
                obj->name = s.target_object;
                for (const auto& [k, v] : s.target_features) obj->features.values[k] = v;
            }
            break;
        case Effect::UpdateSource:
            if (auto* obj = state.find(s.source_object)) {
                for (const auto& [k, v] : s.target_features) obj->features.values[k] = v;
            }
            break;
        case Effect::None:
            break;
    }
    state.edit_log.emplace_back(terminal, s);
}

KnowledgeBase validate_knowledge(FeatureCatalog catalog, ToolDependencyGraph tdg,
                                 ModelDescriptionTable mdt, BenchmarkTable bt) {
    tdg.validate();

    for (const auto& [tool, entry] : mdt.entries) {
        if (!tdg.nodes.count(tool))
            throw DanglingToolReference("MDT tool missing from the dependency graph: " + tool);
        for (const auto& s : entry.supported_subtasks)
            if (!catalog.has_subtask(s))
                throw ValidationError("MDT tool " + tool + " claims unknown subtask: " + s);
    }

    for (const auto& [key, e] : bt.entries) {
        if (e.bench_cost <= 0.0)
            throw ValidationError("benchmark cost must be positive for tool " + key.first);
        if (e.bench_quality < 0.0 || e.bench_quality > 1.0)
            throw ValidationError("benchmark quality outside [0, 1] for tool " + key.first);
        if (!tdg.nodes.count(key.first))
            throw DanglingToolReference("benchmark entry names unknown tool: " + key.first);
    }

    KnowledgeBase kb{std::move(catalog), std::move(tdg), std::move(mdt), std::move(bt), {}};

    // every (tool, subtask) pair reachable in a low-level subgraph must have
    // a benchmark entry; kinds with no capable tool are flagged
    for (const auto& def : kb.catalog.subtasks) {
        auto capable = tools_for_subtask(def.name, kb.mdt);
        if (capable.empty()) {
            kb.unsupported_subtasks.push_back(def.name);
            continue;
        }
        SubtaskInstance probe{def.name, "x", def.requires_target ? "y" : "", 1, {}};
        ToolSubgraph g = build_low_level_subgraph(probe, kb);
        for (const auto& node : g.nodes) {
            if (node.is_start) continue;
            if (!kb.bt.has(node.tool, def.name))
                throw MissingBenchmarkEntry("no benchmark entry for (" + node.tool + ", " +
                                            def.name + ")");
        }
    }
    return kb;
}

}  // namespace toolpath
