#pragma once

#include <optional>
#include <string>
#include <vector>

#include "toolpath/domain.hpp"

namespace toolpath {

struct UnknownEntry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An ordered tool sequence that completes one subtask kind.
struct Subroutine {
    std::string id;  // "SR2", "SR17", ...
    std::vector<ToolId> tools;
    SubtaskType subtask_kind;
};

// Conjunction of bucket predicates over declared context features.
struct ActivationRule {
    enum class Op { Equals, NotEquals, InSet, NotInSet };

    struct Predicate {
        std::string feature;
        Op op = Op::Equals;
        std::vector<std::string> operands;  // sorted, unique
    };

    std::vector<Predicate> predicates;

    void validate(const FeatureCatalog& catalog) const;
    bool operator==(const ActivationRule& o) const;
};

std::string to_string(ActivationRule::Op op);
ActivationRule::Op rule_op_from_string(const std::string& s);

struct RuleEntry {
    Subroutine subroutine;
    ActivationRule rule;
    double avg_cost = 0.0;
    double avg_quality = 0.0;
    long usage_count = 0;
    std::string note;  // free-text provenance of the rule, for adapters
};

struct RuleTable {
    std::vector<RuleEntry> entries;
    long version = 1;

    const RuleEntry* find(const std::string& id) const;
    RuleEntry* find(const std::string& id);
    std::string next_id() const;  // "SR<n+1>" after the highest numbered id
    void validate(const FeatureCatalog& catalog) const;
};

// True iff every predicate holds. A feature missing from the context makes
// the rule unsatisfied (the safe answer is to fall back to search); the
// optional note receives the missing feature name.
bool rule_satisfied(const ActivationRule& rule, const ContextFeatures& ctx,
                    std::string* missing_note = nullptr);

// C_avg^alpha * (2 - Q_avg)^(2-alpha)
double fast_plan_score(const RuleEntry& entry, const TradeoffAlpha& alpha);

// Among entries matching the subtask kind whose rule fires on the context,
// the minimum-score entry (ties broken by id); nullopt when nothing fires.
std::optional<Subroutine> select_subroutine(const SubtaskInstance& s, const ContextFeatures& ctx,
                                            const RuleTable& table, const TradeoffAlpha& alpha);

struct FastPlan {
    struct Assignment {
        SubtaskInstance subtask;
        std::optional<Subroutine> selected;
    };
    std::vector<Assignment> assignments;  // one per chain entry, in order
};

// One selection per chain entry. Contexts are read from the entry's source
// object; by default the working state is advanced with each entry's
// nominal effect so later selections see updated features (set
// plan_from_initial_state to snapshot everything from the initial state
// instead).
FastPlan build_fast_plan(const SubtaskChain& chain, const WorldState& state,
                         const RuleTable& table, const TradeoffAlpha& alpha,
                         const FeatureCatalog& catalog, bool plan_from_initial_state = false);

// Running-mean update of avg_cost / avg_quality; throws UnknownEntry.
void update_entry_stats(RuleTable& table, const std::string& id, double observed_cost,
                        double observed_quality);

}  // namespace toolpath
