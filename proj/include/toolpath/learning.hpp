#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "toolpath/chain.hpp"
#include "toolpath/domain.hpp"
#include "toolpath/executor.hpp"
#include "toolpath/rules.hpp"
#include "toolpath/trace.hpp"

namespace toolpath {

struct MissingDataset : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateBaseline : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Proposal {
    enum class Kind { AddRule, ModifyPath, ModifyRule };
    Kind kind = Kind::AddRule;
    SubtaskType subtask_kind;
    RuleEntry payload;            // candidate entry (id blank for AddRule)
    std::string existing_id;      // target entry for Modify*
    std::string note;
};

std::string to_string(Proposal::Kind kind);

struct VerificationConfig {
    long refinement_interval = 20;  // tasks per refinement cycle
    int n_retries = 2;
    int sample_image_tasks = 25;
    int sample_text_tasks = 20;
    std::uint64_t rng_seed = 0;
    int min_support = 3;  // occurrences per (path, subtask) group before mining
};

// true iff counter > 0 and counter is a multiple of the interval
bool refinement_due(long counter, long interval);

struct MinerFeedback {
    double c_base = 0.0, q_base = 0.0, c_new = 0.0, q_new = 0.0;
    double net_benefit = 0.0;
    std::vector<std::string> task_notes;  // per-task cost/quality deltas
};

class MinerAdapter {
public:
    virtual ~MinerAdapter() = default;
    virtual std::vector<Proposal> mine(const std::vector<ExecutionTrace>& recent,
                                       const RuleTable& table, const FeatureCatalog& catalog) = 0;
    // a rejected proposal may be rewritten given verification feedback;
    // returning nullopt ends the retry loop early
    virtual std::optional<Proposal> refine(const Proposal& rejected, const MinerFeedback& feedback) {
        (void)rejected;
        (void)feedback;
        return std::nullopt;
    }
};

// Deterministic contrast miner: groups traces by (subtask, final path),
// attributes failure records to groups containing the failing tool, and
// contrasts bucket values between failures and successes. Failure-only
// values become not_equals / not_in_set predicates; a single value covering
// all successes and absent from failures becomes equals; mixed values are
// not the contributing factor and emit nothing.
std::vector<Proposal> baseline_mine(const std::vector<ExecutionTrace>& traces,
                                    const RuleTable& table, const FeatureCatalog& catalog,
                                    int min_support = 3);

class ContrastMiner final : public MinerAdapter {
public:
    explicit ContrastMiner(int min_support = 3) : min_support_(min_support) {}
    std::vector<Proposal> mine(const std::vector<ExecutionTrace>& recent, const RuleTable& table,
                               const FeatureCatalog& catalog) override {
        return baseline_mine(recent, table, catalog, min_support_);
    }

private:
    int min_support_;
};

struct TestDataset {
    SubtaskType kind;
    std::vector<TaskSpec> tasks;
};

// n tasks composed exclusively of `kind` subtasks (1-7 ops each, seeded)
// over sampled base states.
TestDataset generate_test_dataset(const SubtaskType& kind, const std::vector<WorldState>& base_states,
                                  int n, std::uint64_t seed, const FeatureCatalog& catalog);

// Measurement seam for verification runs: evaluates a system configuration
// (rule table + mode) over sampled tasks and reports (mean cost, mean
// quality). The production implementation runs the executor over the
// simulator; tests may inject canned measurements.
class SystemEvaluator {
public:
    virtual ~SystemEvaluator() = default;
    virtual std::pair<double, double> evaluate(const RuleTable& table, ExecMode mode,
                                               const std::vector<TaskSpec>& tasks) = 0;
};

class SimSystemEvaluator final : public SystemEvaluator {
public:
    SimSystemEvaluator(const KnowledgeBase& kb, const SimEnvironment& env, TradeoffAlpha alpha,
                       double q_thresh)
        : kb_(&kb), env_(&env), alpha_(alpha), q_thresh_(q_thresh) {}

    std::pair<double, double> evaluate(const RuleTable& table, ExecMode mode,
                                       const std::vector<TaskSpec>& tasks) override;

    // per-subroutine (mean cost, mean quality, uses) from the last run
    struct UseStats {
        double mean_cost = 0.0;
        double mean_quality = 0.0;
        long uses = 0;
    };
    const std::map<std::string, UseStats>& last_run_stats() const { return last_stats_; }

private:
    const KnowledgeBase* kb_;
    const SimEnvironment* env_;
    TradeoffAlpha alpha_;
    double q_thresh_;
    std::map<std::string, UseStats> last_stats_;
};

struct VerifyOutcome {
    bool accepted = false;
    RuleTable table;          // updated on accept, byte-identical otherwise
    double net_benefit = 0.0;  // B of the last evaluated attempt
    int attempts = 0;
    std::string accepted_id;  // id of the touched entry when accepted
};

// Net-benefit gate: sample a per-subtask test set, evaluate the baseline
// system (slow-only on the first refinement cycle, the current adaptive
// table afterwards) and the candidate table on the same sample, accept iff
// B = dC% - dQ% < 0, otherwise ask the miner to refine and re-evaluate on a
// fresh sample up to n_retries times. The table version bumps only on
// accept.
VerifyOutcome verify_proposal(const Proposal& delta, const RuleTable& table,
                              SystemEvaluator& evaluator,
                              const std::map<SubtaskType, TestDataset>& datasets,
                              const VerificationConfig& cfg, MinerAdapter& miner, bool first_cycle,
                              const FeatureCatalog& catalog, std::uint64_t salt = 0);

struct CycleReport {
    long cycle = 0;
    struct Row {
        std::string id;  // entry id touched (or proposed tools when rejected)
        Proposal::Kind kind = Proposal::Kind::AddRule;
        double net_benefit = 0.0;
        bool accepted = false;
        int retries = 0;
    };
    std::vector<Row> proposals;
};

// Mines over the most recent refinement window and verifies each proposal
// in emission order against the evolving table.
std::pair<RuleTable, CycleReport> refinement_cycle(const TraceBuffer& buffer, const RuleTable& table,
                                                   SystemEvaluator& evaluator,
                                                   const std::map<SubtaskType, TestDataset>& datasets,
                                                   const VerificationConfig& cfg, MinerAdapter& miner,
                                                   const FeatureCatalog& catalog, long cycle_index);

}  // namespace toolpath
