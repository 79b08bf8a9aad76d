#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace toolpath {

// ---------------------------------------------------------------------------
// Errors. Validation failures carry enough context to point at the offending
// fixture entry; they are thrown from loaders and table constructors.
// ---------------------------------------------------------------------------

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DanglingToolReference : ValidationError {
    using ValidationError::ValidationError;
};
struct CyclicDependencyGraph : ValidationError {
    using ValidationError::ValidationError;
};
struct MissingBenchmarkEntry : ValidationError {
    using ValidationError::ValidationError;
};
struct NoCapableTool : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Core vocabulary
// ---------------------------------------------------------------------------

using ToolId = std::string;
using SubtaskType = std::string;

enum class SubtaskFamily { Object, Text, Neutral };

// Declares the closed subtask vocabulary, every context feature and its
// bucket set, and which nominal state change each subtask kind applies.
// Feature domains are data, not code: new features from later induction
// rounds need only a fixture edit.
struct FeatureCatalog {
    struct SubtaskDef {
        SubtaskType name;
        SubtaskFamily family = SubtaskFamily::Neutral;
        // removal-like kinds delete their source object, replacement-like
        // kinds rename it; everything else leaves the object list alone.
        enum class Effect { None, DeleteSource, RenameSource, UpdateSource } effect = Effect::None;
        bool requires_target = false;  // replacement / recoloration style
    };

    std::map<std::string, std::vector<std::string>> feature_domains;
    std::vector<SubtaskDef> subtasks;

    bool has_subtask(const SubtaskType& s) const;
    const SubtaskDef& subtask(const SubtaskType& s) const;
    bool has_feature(const std::string& name) const;
    bool bucket_in_domain(const std::string& feature, const std::string& value) const;
};

struct SubtaskInstance {
    SubtaskType kind;
    std::string source_object;  // may be empty for detection-only kinds
    std::string target_object;  // replacement / recoloration target
    int ordinal = 1;            // 1-based position in the chain
    // nominal feature rewrites applied to the (renamed) source object when
    // the subtask completes; lets a replacement re-feature its product
    std::map<std::string, std::string> target_features;

    // App-style display label, e.g. "Object Replacement (Cat -> Rabbit)(3)"
    std::string label() const;
    bool operator==(const SubtaskInstance& o) const {
        return kind == o.kind && source_object == o.source_object &&
               target_object == o.target_object && ordinal == o.ordinal;
    }
};

// Strictly linear chain; entry i's parent is entry i-1.
struct SubtaskChain {
    std::vector<SubtaskInstance> entries;
};

// Bucketed symbolic context; every value must belong to its feature's domain.
struct ContextFeatures {
    std::map<std::string, std::string> values;

    std::optional<std::string> get(const std::string& feature) const;
    void validate(const FeatureCatalog& catalog) const;  // throws ValidationError
    bool operator==(const ContextFeatures& o) const { return values == o.values; }
};

struct ToolDependencyGraph {
    struct Edge {
        ToolId from;
        ToolId to;
        // empty = applies to every subtask family
        std::set<SubtaskFamily> families;

        bool applies_to(SubtaskFamily f) const { return families.empty() || families.count(f) > 0; }
    };

    std::set<ToolId> nodes;
    std::vector<Edge> edges;

    void validate() const;  // endpoints exist, graph acyclic
    std::vector<ToolId> predecessors(const ToolId& tool, SubtaskFamily family) const;
};

struct ModelDescriptionTable {
    struct Entry {
        std::set<SubtaskType> supported_subtasks;
        std::set<std::string> inputs;
        std::set<std::string> outputs;
    };
    std::map<ToolId, Entry> entries;
};

struct BenchmarkTable {
    struct Entry {
        double bench_cost = 0.0;     // seconds, > 0
        double bench_quality = 0.0;  // [0, 1]
    };
    std::map<std::pair<ToolId, SubtaskType>, Entry> entries;

    const Entry& at(const ToolId& tool, const SubtaskType& subtask) const;
    bool has(const ToolId& tool, const SubtaskType& subtask) const;
};

// Trade-off exponent: cost is weighted by alpha, quality by 2 - alpha, so
// both exponents stay non-negative on [0, 2].
struct TradeoffAlpha {
    double alpha = 1.0;

    TradeoffAlpha() = default;
    explicit TradeoffAlpha(double a) : alpha(a) {
        if (a < 0.0 || a > 2.0) throw ValidationError("alpha must lie in [0, 2]");
    }
};

// Abstract stand-in for the edited image: a list of named objects with
// bucketed features plus an append-only log of applied edits.
struct WorldState {
    struct Object {
        std::string name;
        ContextFeatures features;
    };
    std::vector<Object> objects;
    std::vector<std::pair<ToolId, SubtaskInstance>> edit_log;

    const Object* find(const std::string& name) const;
    Object* find(const std::string& name);
};

// Applies the subtask's nominal effect (removal deletes the object,
// replacement renames and re-features it, ...) and records the edit.
void apply_subtask_effect(WorldState& state, const SubtaskInstance& s, const ToolId& terminal,
                          const FeatureCatalog& catalog);

struct KnowledgeBase {
    FeatureCatalog catalog;
    ToolDependencyGraph tdg;
    ModelDescriptionTable mdt;
    BenchmarkTable bt;
    // subtask kinds in the vocabulary with no MDT supporter (flagged, not fatal)
    std::vector<SubtaskType> unsupported_subtasks;
};

// Cross-validates the three knowledge structures against the catalog:
// every MDT tool appears in the TDG, the TDG is acyclic, and every
// (tool, subtask) pair reachable in any low-level subgraph has a BT entry.
KnowledgeBase validate_knowledge(FeatureCatalog catalog, ToolDependencyGraph tdg,
                                 ModelDescriptionTable mdt, BenchmarkTable bt);

}  // namespace toolpath
