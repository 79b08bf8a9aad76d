#include "toolpath/batch.hpp"

#include <cstdio>
#include <filesystem>

#include "toolpath/json_io.hpp"

namespace toolpath {

void RunManifest::load() {
    namespace fs = std::filesystem;
    for (const std::string* p :
         {&features_path, &tdg_path, &mdt_path, &bt_path, &rules_path, &sim_path})
        if (!fs::exists(*p)) throw ValidationError("manifest references missing file: " + *p);

    kb = load_knowledge_files(features_path, tdg_path, mdt_path, bt_path);
    rules = parse_rules(load_json_file(rules_path), kb.catalog);
    rules.validate(kb.catalog);
    sim = parse_sim(load_json_file(sim_path), kb.catalog);
}

BatteryRunResult run_battery(const std::vector<TaskSpec>& tasks, const RuleTable& rules,
                             const KnowledgeBase& kb, const SimEnvironment& env,
                             const ExecutionConfig& base_cfg) {
    BatteryRunResult out;
    double cost_sum = 0.0, quality_sum = 0.0;
    for (size_t i = 0; i < tasks.size(); ++i) {
        ExecutionConfig cfg = base_cfg;
        cfg.task_salt = i;
        auto [result, traces] = execute_task(tasks[i], rules, kb, env, cfg);
        cost_sum += result.total_cost;
        quality_sum += result.mean_quality;
        out.results.push_back(std::move(result));
        out.traces.push_back(std::move(traces));
    }
    if (!tasks.empty()) {
        out.mean_cost = cost_sum / static_cast<double>(tasks.size());
        out.mean_quality = quality_sum / static_cast<double>(tasks.size());
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string battery_csv(const BatteryRunResult& run) {
    std::string csv = "task,fast_subtasks,slow_subtasks,total_cost,mean_quality\n";
    for (size_t i = 0; i < run.results.size(); ++i) {
        const auto& r = run.results[i];
        long fast = 0, slow = 0;
        for (const auto& sr : r.subtasks) (sr.fast ? fast : slow)++;
        csv += std::to_string(i) + "," + std::to_string(fast) + "," + std::to_string(slow) + "," +
               fmt(r.total_cost) + "," + fmt(r.mean_quality) + "\n";
    }
    return csv;
}

std::vector<SweepRow> sweep_alpha(const std::vector<TaskSpec>& tasks, const RuleTable& rules,
                                  const KnowledgeBase& kb, const SimEnvironment& env,
                                  ExecMode mode, double q_thresh,
                                  const std::vector<double>& alphas) {
    std::vector<SweepRow> rows;
    for (double a : alphas) {
        ExecutionConfig cfg;
        cfg.alpha = TradeoffAlpha(a);
        cfg.mode = mode;
        cfg.q_thresh = q_thresh;
        BatteryRunResult run = run_battery(tasks, rules, kb, env, cfg);
        rows.push_back({a, run.mean_cost, run.mean_quality});
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string csv = "alpha,mean_cost,mean_quality\n";
    for (const auto& r : rows)
        csv += fmt(r.alpha) + "," + fmt(r.mean_cost) + "," + fmt(r.mean_quality) + "\n";
    return csv;
}

LearnRun run_learning_stream(const std::vector<TaskSpec>& stream, const RuleTable& initial_rules,
                             const KnowledgeBase& kb, const SimEnvironment& env,
                             const ExecutionConfig& base_cfg, const VerificationConfig& vcfg,
                             MinerAdapter& miner,
                             const std::map<SubtaskType, TestDataset>& datasets) {
    LearnRun run;
    run.final_rules = initial_rules;

    SimSystemEvaluator evaluator(kb, env, base_cfg.alpha, base_cfg.q_thresh);
    TraceBuffer buffer;

    long cumulative_fast = 0, cumulative_subtasks = 0;
    long window_fallback = 0, window_subtasks = 0;
    double cumulative_cost = 0.0;
    long cycle = 0;

    for (size_t i = 0; i < stream.size(); ++i) {
        ExecutionConfig cfg = base_cfg;
        cfg.mode = ExecMode::Adaptive;
        cfg.task_salt = i;
        auto [result, traces] = execute_task(stream[i], run.final_rules, kb, env, cfg);
        buffer.add_task(traces);
        cumulative_cost += result.total_cost;
        for (const auto& sr : result.subtasks) {
            ++cumulative_subtasks;
            ++window_subtasks;
            if (sr.fast)
                ++cumulative_fast;
            else
                ++window_fallback;
        }

        if (refinement_due(buffer.task_counter, vcfg.refinement_interval)) {
            ++cycle;
            auto [table, report] = refinement_cycle(buffer, run.final_rules, evaluator, datasets,
                                                    vcfg, miner, kb.catalog, cycle);
            run.final_rules = std::move(table);
            run.cycles.push_back(std::move(report));

            LearnCheckpoint cp;
            cp.tasks_explored = buffer.task_counter;
            cp.fast_success_rate = cumulative_subtasks
                                       ? static_cast<double>(cumulative_fast) /
                                             static_cast<double>(cumulative_subtasks)
                                       : 0.0;
            cp.mean_cost = cumulative_cost / static_cast<double>(buffer.task_counter);
            cp.window_fallback_rate = window_subtasks
                                          ? static_cast<double>(window_fallback) /
                                                static_cast<double>(window_subtasks)
                                          : 0.0;
            run.checkpoints.push_back(cp);
            window_fallback = 0;
            window_subtasks = 0;
        }
    }
    return run;
}

std::string learn_csv(const LearnRun& run) {
    std::string csv = "tasks_explored,fast_success_rate,mean_cost,window_fallback_rate\n";
    for (const auto& cp : run.checkpoints)
        csv += std::to_string(cp.tasks_explored) + "," + fmt(cp.fast_success_rate) + "," +
               fmt(cp.mean_cost) + "," + fmt(cp.window_fallback_rate) + "\n";
    return csv;
}

}  // namespace toolpath
