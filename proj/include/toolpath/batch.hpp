#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "toolpath/executor.hpp"
#include "toolpath/learning.hpp"
#include "toolpath/sim.hpp"

namespace toolpath {

// Validated run configuration shared by every CLI command. All referenced
// files must exist and parse before any execution starts.
struct RunManifest {
    std::string features_path;
    std::string tdg_path;
    std::string mdt_path;
    std::string bt_path;
    std::string rules_path;
    std::string sim_path;
    TradeoffAlpha alpha{1.0};
    ExecMode mode = ExecMode::Adaptive;
    double q_thresh = 0.8;
    std::uint64_t seed = 0;
    std::string out_dir;

    KnowledgeBase kb;
    RuleTable rules;
    SimEnvironment sim;

    void load();  // parses + validates everything; throws on any defect
};

struct BatteryRunResult {
    std::vector<TaskResult> results;
    std::vector<std::vector<ExecutionTrace>> traces;  // per task
    double mean_cost = 0.0;
    double mean_quality = 0.0;
};

BatteryRunResult run_battery(const std::vector<TaskSpec>& tasks, const RuleTable& rules,
                             const KnowledgeBase& kb, const SimEnvironment& env,
                             const ExecutionConfig& base_cfg);

// Per-task aggregate rows: task,fast_subtasks,slow_subtasks,total_cost,mean_quality
std::string battery_csv(const BatteryRunResult& run);

struct SweepRow {
    double alpha = 0.0;
    double mean_cost = 0.0;
    double mean_quality = 0.0;
};

std::vector<SweepRow> sweep_alpha(const std::vector<TaskSpec>& tasks, const RuleTable& rules,
                                  const KnowledgeBase& kb, const SimEnvironment& env,
                                  ExecMode mode, double q_thresh,
                                  const std::vector<double>& alphas);
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct LearnCheckpoint {
    long tasks_explored = 0;
    double fast_success_rate = 0.0;   // cumulative share of fast subtasks
    double mean_cost = 0.0;           // cumulative mean task cost
    double window_fallback_rate = 0.0;  // share of slow/failed subtasks in the last window
};

struct LearnRun {
    std::vector<LearnCheckpoint> checkpoints;
    std::vector<CycleReport> cycles;
    RuleTable final_rules;
};

// Streams tasks through the adaptive executor, triggering a refinement
// cycle every cfg.refinement_interval tasks; one checkpoint per cycle.
LearnRun run_learning_stream(const std::vector<TaskSpec>& stream, const RuleTable& initial_rules,
                             const KnowledgeBase& kb, const SimEnvironment& env,
                             const ExecutionConfig& base_cfg, const VerificationConfig& vcfg,
                             MinerAdapter& miner,
                             const std::map<SubtaskType, TestDataset>& datasets);

std::string learn_csv(const LearnRun& run);

// Seeded 200-task learning stream with engineered single-feature failure
// conditions (used by `learn` and the learning tests); the returned
// environment's degradations are the ground truths the miner must recover.
struct LearningFixture {
    Battery battery;                       // stream tasks + environment
    std::map<SubtaskType, TestDataset> datasets;
    // path key "tool>tool>..." + subtask -> engineered predicate
    std::map<std::string, ActivationRule> ground_truth;
};
LearningFixture build_learning_fixture(std::uint64_t seed, const KnowledgeBase& kb, long n_tasks);

std::string path_key(const std::vector<ToolId>& tools, const SubtaskType& subtask);

}  // namespace toolpath
