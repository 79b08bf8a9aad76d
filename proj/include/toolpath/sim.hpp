#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "toolpath/astar.hpp"
#include "toolpath/chain.hpp"
#include "toolpath/domain.hpp"
#include "toolpath/rules.hpp"

namespace toolpath {

struct MissingProfile : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Deterministic behavior model of one (tool, subtask) pair: base cost and
// quality, plus context-conditioned degradations. The first matching
// degradation wins; with noise_sigma = 0 the outcome is a pure function of
// (profile, context).
struct SimToolProfile {
    ToolId tool;
    SubtaskType subtask_kind;
    double base_cost = 1.0;
    double base_quality = 1.0;
    struct Degradation {
        ActivationRule condition;  // fires when ALL predicates hold
        double quality_override = 0.0;
        double cost_multiplier = 1.0;  // kept >= 1 so benchmark estimates stay lower bounds
    };
    std::vector<Degradation> degradations;
    double noise_sigma = 0.0;
};

struct SimEnvironment {
    std::map<std::pair<ToolId, SubtaskType>, SimToolProfile> profiles;
    std::uint64_t rng_seed = 0;

    const SimToolProfile& profile(const ToolId& tool, const SubtaskType& subtask) const;
    bool has_profile(const ToolId& tool, const SubtaskType& subtask) const;
};

struct SimResult {
    double cost = 0.0;
    double quality = 0.0;
};

// cost = base_cost * matched multiplier (+ seeded noise), quality = matched
// override or base (+ seeded noise), clamped to [0, 1]. Noise draws are
// keyed on (seed, task, subtask ordinal, tool, attempt) so evaluation order
// never matters.
SimResult simulate_tool(const SimEnvironment& env, const ToolId& tool, const SubtaskInstance& s,
                        const ContextFeatures& ctx, std::uint64_t task_salt, int attempt);

// The simulator's quality gate is truthful: it reports the simulated
// quality of the execution it checks.
double simulate_vlm_check(const SimResult& result, const SubtaskInstance& s, const ToolId& tool);

// ToolExecutor / QualityChecker adapters over a SimEnvironment, bound to one
// task (for noise derivation) and one world state (for contexts).
class SimToolExecutor final : public ToolExecutor {
public:
    SimToolExecutor(const SimEnvironment& env, std::uint64_t task_salt)
        : env_(&env), task_salt_(task_salt) {}

    ToolRun run(const ToolId& tool, const SubtaskInstance& subtask, const ContextFeatures& ctx,
                int attempt) override;

private:
    const SimEnvironment* env_;
    std::uint64_t task_salt_;
};

class SimQualityChecker final : public QualityChecker {
public:
    double score(const ToolRun& run, const SubtaskInstance& subtask, const ToolId& tool) override;
};

struct Battery {
    std::vector<TaskSpec> tasks;
    SimEnvironment environment;
};

// Seeded battery of ~120 tasks mixing removal / recoloration / replacement /
// text subtasks (1-8 ops each, stratified context archetypes) over an
// environment whose degradations mirror the seeded activation rules.
Battery build_reference_battery(std::uint64_t seed, const KnowledgeBase& kb);

// Checks that each seeded rule's satisfaction implies that no degradation
// fires on its path (predicate algebra over the declared bucket domains).
// Returns human-readable violations; empty means consistent.
std::vector<std::string> check_rule_degradation_consistency(const RuleTable& rules,
                                                            const SimEnvironment& env,
                                                            const FeatureCatalog& catalog);

}  // namespace toolpath
