#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "toolpath/astar.hpp"
#include "toolpath/chain.hpp"
#include "toolpath/domain.hpp"
#include "toolpath/rules.hpp"
#include "toolpath/sim.hpp"
#include "toolpath/trace.hpp"

namespace toolpath {

struct EmptyCollection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExecMode { Adaptive, FastOnly, SlowOnly };

ExecMode exec_mode_from_string(const std::string& s);
std::string to_string(ExecMode mode);

enum class FallbackReason { None, NoSubroutine, VlmFailure };

struct SubtaskResult {
    SubtaskInstance subtask;
    bool fast = false;  // completed by a selected subroutine
    FallbackReason fallback_reason = FallbackReason::None;
    bool completed = true;
    double cost = 0.0;     // includes sunk cost of abandoned fast attempts
    double quality = 0.0;  // mean of the final path's per-tool check scores
    std::vector<ToolId> path;
    std::vector<SearchLogRecord> search_log;  // populated when requested
};

struct TaskResult {
    std::vector<SubtaskResult> subtasks;
    double total_cost = 0.0;
    double mean_quality = 0.0;
    WorldState final_state;
    bool failed = false;  // some subtask could not be completed
};

struct ExecutionConfig {
    TradeoffAlpha alpha{1.0};
    ExecMode mode = ExecMode::Adaptive;
    double q_thresh = 0.8;
    int max_retries = 1;
    bool plan_from_initial_state = false;
    bool keep_search_log = false;
    std::uint64_t task_salt = 0;  // noise stream discriminator
};

// The adaptive fast-slow loop: per chain entry, try the selected subroutine
// with a quality gate after every tool; on a failed gate (sunk cost kept,
// partial edits rolled back) or on no selection, construct the low-level
// subgraph and run the slow search from the pre-subtask state. SlowOnly
// forces the search for every entry; FastOnly records an incomplete subtask
// instead of falling back.
std::pair<TaskResult, std::vector<ExecutionTrace>> execute_task(const TaskSpec& spec,
                                                                const RuleTable& table,
                                                                const KnowledgeBase& kb,
                                                                const SimEnvironment& env,
                                                                const ExecutionConfig& cfg);

struct FallbackStatistics {
    double fast_pct = 0.0;
    double slow_pct = 0.0;
    double vlm_failure_pct = 0.0;
    double no_subroutine_pct = 0.0;
    std::map<SubtaskType, double> by_subtask_kind;  // slow contribution per kind
    long total_subtasks = 0;
};

FallbackStatistics fallback_statistics(const std::vector<TaskResult>& results);

}  // namespace toolpath
