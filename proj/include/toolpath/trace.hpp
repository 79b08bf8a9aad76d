#pragma once

#include <string>
#include <vector>

#include "toolpath/domain.hpp"

namespace toolpath {

// Per-subtask execution record feeding rule induction: the path that
// finally completed the subtask, the bucketed context it ran under, and
// every quality-gate failure met along the way (with the context active at
// failure time).
struct ExecutionTrace {
    SubtaskType subtask_kind;
    std::vector<ToolId> final_path;
    ContextFeatures context;
    double path_cost = 0.0;     // final path only, not exploration
    double path_quality = 0.0;  // mean of per-tool check scores
    struct Failure {
        ToolId tool;
        ContextFeatures context_at_failure;
    };
    std::vector<Failure> failures;
    bool success = true;
};

// Append-only buffer; the counter ticks once per task.
struct TraceBuffer {
    std::vector<ExecutionTrace> traces;
    long task_counter = 0;

    void add_task(const std::vector<ExecutionTrace>& task_traces);
    // traces produced by the most recent `tasks` tasks
    std::vector<ExecutionTrace> recent(long tasks) const;

private:
    std::vector<size_t> task_offsets_;  // start index per task
};

}  // namespace toolpath
