#pragma once

#include <optional>
#include <string>
#include <vector>

#include "toolpath/domain.hpp"
#include "toolpath/subgraph.hpp"

namespace toolpath {

struct FailureRecord {
    ToolId tool;
    ContextFeatures context_at_failure;
};

// Thrown when every path through the subgraph failed the quality gate; the
// exploration already paid for its executions, so the partial accounting
// rides along.
struct SearchExhausted : std::runtime_error {
    double explored_cost = 0.0;
    int expansions = 0;
    int retries = 0;
    int vlm_failures = 0;
    std::vector<FailureRecord> failures;

    explicit SearchExhausted(const std::string& what) : std::runtime_error(what) {}
};

// Accumulated (cost sum, quality product) along one concrete path prefix.
// The path score is (sum c)^alpha * (2 - prod q)^(2-alpha); it depends on
// the whole prefix, so frontier entries carry their own accumulator instead
// of relaxing a per-node scalar.
struct PathAccumulator {
    struct Step {
        ToolId tool;
        SubtaskInstance subtask;
        double cost = 0.0;
        double quality = 1.0;
    };

    double cost_sum = 0.0;
    double quality_product = 1.0;
    std::vector<Step> steps;

    void push(Step step);
    bool empty() const { return steps.empty(); }
    bool consistent(double cost_tol = 1e-9, double quality_tol = 1e-12) const;
};

// (sum c)^alpha * (2 - prod q)^(2-alpha); an empty accumulator scores 0.
double path_score(const PathAccumulator& acc, const TradeoffAlpha& alpha);
double pair_score(double cost_sum, double quality_product, const TradeoffAlpha& alpha);

// Per-node cost-to-go estimates, computed by a backward pass from the
// leaves: each node keeps the minimizing neighbor's accumulated
// (h_cost, h_quality) pair and the minimized scalar h_value. Leaves hold
// (0, 1, 0).
struct HeuristicTable {
    struct Entry {
        double h_cost = 0.0;
        double h_quality = 1.0;
        double h_value = 0.0;
    };
    std::vector<Entry> entries;  // indexed like the subgraph nodes

    const Entry& at(int node) const { return entries.at(static_cast<size_t>(node)); }
};

HeuristicTable compute_heuristics(const ToolSubgraph& g, const BenchmarkTable& bt,
                                  const TradeoffAlpha& alpha);

// Execution seam: tools are actually run (simulated) as the search expands
// nodes, and a quality checker gates each run.
struct ToolRun {
    double cost = 0.0;
    double quality = 0.0;
};

class ToolExecutor {
public:
    virtual ~ToolExecutor() = default;
    virtual ToolRun run(const ToolId& tool, const SubtaskInstance& subtask,
                        const ContextFeatures& ctx, int attempt) = 0;
    // whether one instance may serve concurrent searches
    virtual bool shareable() const { return true; }
};

class QualityChecker {
public:
    virtual ~QualityChecker() = default;
    virtual double score(const ToolRun& run, const SubtaskInstance& subtask,
                         const ToolId& tool) = 0;
};

struct SearchConfig {
    double q_thresh = 0.8;
    int max_retries = 1;  // re-executions per node after a failed check
    bool keep_log = false;
};

struct SearchLogRecord {
    std::string node;
    double g = 0.0;
    double h = 0.0;
    double f = 0.0;
    std::string action;  // expand | retry | abandon | goal
};

struct SearchOutcome {
    PathAccumulator path;    // ends at a leaf of the searched subgraph
    double score = 0.0;      // path_score of `path`
    WorldState final_state;  // input state with the completed subtask applied
    int expansions = 0;      // node executions (retries not counted)
    int retries = 0;
    int vlm_failures = 0;
    double total_executed_cost = 0.0;  // every execution, including failures
    std::vector<FailureRecord> failures;
    std::vector<SearchLogRecord> log;
};

// Cost-sensitive best-first search over the subgraph. Expansion order is
// f = g + h with the benchmark-estimated g for the unexecuted node; on
// expansion the tool is executed, quality-gated, retried up to
// max_retries, and its branch abandoned if it still fails. A complete path
// is returned once no surviving frontier prefix can beat the best one
// found (bounded with benchmark suffix estimates), which reproduces the
// brute-force argmin whenever actual cost/quality are no better than the
// benchmark values.
SearchOutcome astar_search(const ToolSubgraph& g, const TradeoffAlpha& alpha,
                           const BenchmarkTable& bt, ToolExecutor& executor,
                           QualityChecker& vlm, const SearchConfig& cfg,
                           const WorldState& state, const FeatureCatalog& catalog);

}  // namespace toolpath
