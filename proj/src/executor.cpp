#include "toolpath/executor.hpp"

#include <algorithm>
#include <numeric>

#include "toolpath/subgraph.hpp"

namespace toolpath {

ExecMode exec_mode_from_string(const std::string& s) {
    if (s == "adaptive") return ExecMode::Adaptive;
    if (s == "fast") return ExecMode::FastOnly;
    if (s == "slow") return ExecMode::SlowOnly;
    throw ValidationError("unknown execution mode: " + s);
}

std::string to_string(ExecMode mode) {
    switch (mode) {
        case ExecMode::Adaptive: return "adaptive";
        case ExecMode::FastOnly: return "fast";
        case ExecMode::SlowOnly: return "slow";
    }
    return "adaptive";
}

namespace {

ContextFeatures context_of(const WorldState& state, const SubtaskInstance& s) {
    if (const auto* obj = state.find(s.source_object)) return obj->features;
    return {};
}

struct FastAttempt {
    bool ok = false;
    double sunk_cost = 0.0;       // paid even on failure
    double quality_mean = 0.0;    // over all executed tools, valid when ok
    std::vector<ToolId> path;
    std::vector<ExecutionTrace::Failure> failures;
};

FastAttempt attempt_subroutine(const Subroutine& sub, const SubtaskInstance& s,
                               const ContextFeatures& ctx, const SimEnvironment& env,
                               const ExecutionConfig& cfg) {
    FastAttempt att;
    double quality_sum = 0.0;
    for (const auto& tool : sub.tools) {
        SimResult r = simulate_tool(env, tool, s, ctx, cfg.task_salt, 0);
        att.sunk_cost += r.cost;
        double q = simulate_vlm_check(r, s, tool);
        if (q < cfg.q_thresh) {
            att.failures.push_back({tool, ctx});
            return att;  // abandon the fast attempt, cost stays sunk
        }
        quality_sum += q;
        att.path.push_back(tool);
    }
    att.ok = true;
    att.quality_mean = quality_sum / static_cast<double>(sub.tools.size());
    return att;
}

}  // namespace

std::pair<TaskResult, std::vector<ExecutionTrace>> execute_task(const TaskSpec& spec,
                                                                const RuleTable& table,
                                                                const KnowledgeBase& kb,
                                                                const SimEnvironment& env,
                                                                const ExecutionConfig& cfg) {
    SubtaskChain chain = propose_chain_structured(spec, kb.catalog);

    TaskResult result;
    std::vector<ExecutionTrace> traces;
    WorldState state = spec.initial_state;

    // optional plan-time snapshot: selections fixed from the initial state
    FastPlan snapshot_plan;
    if (cfg.plan_from_initial_state && cfg.mode != ExecMode::SlowOnly)
        snapshot_plan = build_fast_plan(chain, state, table, cfg.alpha, kb.catalog, true);

    SimToolExecutor tool_executor(env, cfg.task_salt);
    SimQualityChecker checker;

    for (size_t idx = 0; idx < chain.entries.size(); ++idx) {
        const SubtaskInstance& entry = chain.entries[idx];
        ContextFeatures ctx = context_of(state, entry);

        SubtaskResult sr;
        sr.subtask = entry;
        ExecutionTrace trace;
        trace.subtask_kind = entry.kind;
        trace.context = ctx;

        std::optional<Subroutine> selection;
        if (cfg.mode != ExecMode::SlowOnly) {
            if (cfg.plan_from_initial_state)
                selection = snapshot_plan.assignments[idx].selected;
            else
                selection = select_subroutine(entry, ctx, table, cfg.alpha);
        }

        bool need_slow = false;
        if (selection) {
            FastAttempt att = attempt_subroutine(*selection, entry, ctx, env, cfg);
            sr.cost += att.sunk_cost;
            trace.failures.insert(trace.failures.end(), att.failures.begin(), att.failures.end());
            if (att.ok) {
                sr.fast = true;
                sr.quality = att.quality_mean;
                sr.path = att.path;
                trace.final_path = att.path;
                trace.path_cost = att.sunk_cost;
                trace.path_quality = att.quality_mean;
                apply_subtask_effect(state, entry, att.path.back(), kb.catalog);
            } else {
                sr.fallback_reason = FallbackReason::VlmFailure;
                need_slow = true;  // partial edits rolled back: state untouched
            }
        } else {
            sr.fallback_reason = FallbackReason::NoSubroutine;
            need_slow = true;
        }

        if (need_slow) {
            if (cfg.mode == ExecMode::FastOnly) {
                // no fallback in this ablation: the subtask simply fails
                sr.completed = false;
                sr.quality = 0.0;
                trace.success = false;
                result.failed = true;
            } else {
                try {
                    ToolSubgraph g = build_low_level_subgraph(entry, kb);
                    SearchConfig scfg;
                    scfg.q_thresh = cfg.q_thresh;
                    scfg.max_retries = cfg.max_retries;
                    scfg.keep_log = cfg.keep_search_log;
                    SearchOutcome outcome = astar_search(g, cfg.alpha, kb.bt, tool_executor,
                                                         checker, scfg, state, kb.catalog);
                    sr.search_log = std::move(outcome.log);
                    sr.cost += outcome.total_executed_cost;
                    double qsum = 0.0;
                    for (const auto& step : outcome.path.steps) {
                        sr.path.push_back(step.tool);
                        qsum += step.quality;
                    }
                    sr.quality = qsum / static_cast<double>(outcome.path.steps.size());
                    for (const auto& f : outcome.failures)
                        trace.failures.push_back({f.tool, f.context_at_failure});
                    trace.final_path = sr.path;
                    trace.path_cost = outcome.path.cost_sum;
                    trace.path_quality = sr.quality;
                    state = outcome.final_state;
                } catch (const SearchExhausted& ex) {
                    sr.completed = false;
                    sr.quality = 0.0;
                    sr.cost += ex.explored_cost;  // dead exploration is still paid for
                    for (const auto& f : ex.failures)
                        trace.failures.push_back({f.tool, f.context_at_failure});
                    trace.success = false;
                    result.failed = true;
                } catch (const NoCapableTool&) {
                    sr.completed = false;
                    sr.quality = 0.0;
                    trace.success = false;
                    result.failed = true;
                }
            }
        }

        result.total_cost += sr.cost;
        result.subtasks.push_back(sr);
        traces.push_back(std::move(trace));
    }

    double qsum = 0.0;
    for (const auto& sr : result.subtasks) qsum += sr.quality;
    result.mean_quality =
        result.subtasks.empty() ? 0.0 : qsum / static_cast<double>(result.subtasks.size());
    result.final_state = std::move(state);
    return {std::move(result), std::move(traces)};
}

FallbackStatistics fallback_statistics(const std::vector<TaskResult>& results) {
    if (results.empty()) throw EmptyCollection("no task results to aggregate");
    FallbackStatistics stats;
    long fast = 0, vlm = 0, none = 0;
    std::map<SubtaskType, long> slow_by_kind;
    for (const auto& r : results) {
        for (const auto& sr : r.subtasks) {
            ++stats.total_subtasks;
            if (sr.fast) {
                ++fast;
            } else {
                ++slow_by_kind[sr.subtask.kind];
                if (sr.fallback_reason == FallbackReason::VlmFailure)
                    ++vlm;
                else
                    ++none;
            }
        }
    }
    if (stats.total_subtasks == 0) throw EmptyCollection("task results contain no subtasks");
    double total = static_cast<double>(stats.total_subtasks);
    stats.fast_pct = 100.0 * static_cast<double>(fast) / total;
    stats.slow_pct = 100.0 * static_cast<double>(stats.total_subtasks - fast) / total;
    stats.vlm_failure_pct = 100.0 * static_cast<double>(vlm) / total;
    stats.no_subroutine_pct = 100.0 * static_cast<double>(none) / total;
    for (const auto& [kind, n] : slow_by_kind)
        stats.by_subtask_kind[kind] = 100.0 * static_cast<double>(n) / total;
    return stats;
}

}  // namespace toolpath
