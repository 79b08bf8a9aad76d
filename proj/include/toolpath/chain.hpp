#pragma once

#include <string>
#include <vector>

#include "toolpath/domain.hpp"

namespace toolpath {

struct UnresolvableOrdering : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Machine-readable task request: the prompt is informational, the ops list
// is what the engine consumes.
struct TaskSpec {
    std::string prompt;
    std::vector<SubtaskInstance> structured_ops;  // ordinals assigned by the planner
    WorldState initial_state;
};

// Seam for an LLM-backed planner; the structured planner below is the
// default and the reference for every test.
class ChainPlannerAdapter {
public:
    virtual ~ChainPlannerAdapter() = default;
    virtual SubtaskChain propose_chain(const TaskSpec& spec, const FeatureCatalog& catalog) = 0;
};

// Orders the requested ops so that an op reading an object produced by
// another op runs after its producer; otherwise keeps input order (stable
// Kahn topological sort). Throws UnresolvableOrdering on circular object
// dependencies.
SubtaskChain propose_chain_structured(const TaskSpec& spec, const FeatureCatalog& catalog);

struct ChainValidationReport {
    bool linear = true;
    bool ordinals_consecutive = true;
    bool dependencies_satisfied = true;
    bool covers_all_ops = true;
    std::vector<std::string> failures;

    bool ok() const {
        return linear && ordinals_consecutive && dependencies_satisfied && covers_all_ops;
    }
};

ChainValidationReport validate_chain(const SubtaskChain& chain, const TaskSpec& spec);

class StructuredChainPlanner final : public ChainPlannerAdapter {
public:
    SubtaskChain propose_chain(const TaskSpec& spec, const FeatureCatalog& catalog) override {
        return propose_chain_structured(spec, catalog);
    }
};

}  // namespace toolpath
