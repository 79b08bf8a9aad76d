#pragma once

#include "toolpath/domain.hpp"
#include "toolpath/rules.hpp"
#include "toolpath/sim.hpp"

namespace toolpath::fixtures {

// The authored knowledge fixtures. The data/*.json files are serialized
// snapshots of these tables; a test keeps them in sync.

FeatureCatalog reference_catalog();
ToolDependencyGraph reference_tdg();
ModelDescriptionTable reference_mdt();
BenchmarkTable reference_benchmark();
KnowledgeBase reference_knowledge();

// The sixteen seeded subroutine rules with their published averages.
RuleTable seeded_rule_table();

// Simulation profiles mirroring the benchmark table, with degradations that
// are the logical complements of the seeded activation rules per path.
SimEnvironment reference_environment(std::uint64_t seed = 0);

}  // namespace toolpath::fixtures
