#include "toolpath/sim.hpp"

#include <algorithm>
#include <cmath>

#include "toolpath/rng.hpp"

namespace toolpath {

const SimToolProfile& SimEnvironment::profile(const ToolId& tool,
                                              const SubtaskType& subtask) const {
    auto it = profiles.find({tool, subtask});
    if (it == profiles.end())
        throw MissingProfile("no simulation profile for (" + tool + ", " + subtask + ")");
    return it->second;
}

bool SimEnvironment::has_profile(const ToolId& tool, const SubtaskType& subtask) const {
    return profiles.count({tool, subtask}) > 0;
}

namespace {

// standard normal from two stateless uniforms (Box-Muller)
double seeded_gauss(const SeedSequence& seq, std::uint64_t salt) {
    double u1 = seq.unit(hash_combine(salt, 1));
    double u2 = seq.unit(hash_combine(salt, 2));
    u1 = std::max(u1, 1e-12);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace

SimResult simulate_tool(const SimEnvironment& env, const ToolId& tool, const SubtaskInstance& s,
                        const ContextFeatures& ctx, std::uint64_t task_salt, int attempt) {
    const SimToolProfile& p = env.profile(tool, s.kind);

    double cost = p.base_cost;
    double quality = p.base_quality;
    for (const auto& d : p.degradations) {
        if (rule_satisfied(d.condition, ctx)) {  // first match wins
            cost = p.base_cost * d.cost_multiplier;
            quality = d.quality_override;
            break;
        }
    }

    if (p.noise_sigma > 0.0) {
        SeedSequence stream = SeedSequence(env.rng_seed)
                                  .with(task_salt)
                                  .with(static_cast<std::uint64_t>(s.ordinal))
                                  .with(tool)
                                  .with(static_cast<std::uint64_t>(attempt));
        cost = std::max(0.0, cost + p.noise_sigma * seeded_gauss(stream, 0xc0c0));
        quality = quality + p.noise_sigma * seeded_gauss(stream, 0x9a11);
    }
    quality = std::clamp(quality, 0.0, 1.0);
    return {cost, quality};
}

double simulate_vlm_check(const SimResult& result, const SubtaskInstance&, const ToolId&) {
    return result.quality;  // the simulated gate is truthful
}

ToolRun SimToolExecutor::run(const ToolId& tool, const SubtaskInstance& subtask,
                             const ContextFeatures& ctx, int attempt) {
    SimResult r = simulate_tool(*env_, tool, subtask, ctx, task_salt_, attempt);
    return {r.cost, r.quality};
}

double SimQualityChecker::score(const ToolRun& run, const SubtaskInstance& subtask,
                                const ToolId& tool) {
    return simulate_vlm_check({run.cost, run.quality}, subtask, tool);
}

// ---------------------------------------------------------------------------
// Rule/degradation consistency
// ---------------------------------------------------------------------------

namespace {

// allowed bucket set for `feature` under a predicate conjunction; the full
// domain when unconstrained
std::vector<std::string> allowed_buckets(const ActivationRule& rule, const std::string& feature,
                                         const FeatureCatalog& catalog) {
    std::vector<std::string> allowed = catalog.feature_domains.at(feature);
    for (const auto& pred : rule.predicates) {
        if (pred.feature != feature) continue;
        auto in_operands = [&](const std::string& v) {
            return std::find(pred.operands.begin(), pred.operands.end(), v) != pred.operands.end();
        };
        std::vector<std::string> next;
        for (const auto& v : allowed) {
            bool keep = false;
            switch (pred.op) {
                case ActivationRule::Op::Equals:
                case ActivationRule::Op::InSet:
                    keep = in_operands(v);
                    break;
                case ActivationRule::Op::NotEquals:
                case ActivationRule::Op::NotInSet:
                    keep = !in_operands(v);
                    break;
            }
            if (keep) next.push_back(v);
        }
        allowed = std::move(next);
    }
    return allowed;
}

// true when some context satisfying `rule` also satisfies `condition`
// (checked feature-by-feature over the declared bucket domains; predicates
// here are conjunctions, so joint satisfiability decomposes per feature)
bool conjunction_overlaps(const ActivationRule& rule, const ActivationRule& condition,
                          const FeatureCatalog& catalog) {
    std::vector<std::string> features;
    for (const auto& p : rule.predicates) features.push_back(p.feature);
    for (const auto& p : condition.predicates) features.push_back(p.feature);
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());

    for (const auto& f : features) {
        if (!catalog.has_feature(f)) return false;
        auto a = allowed_buckets(rule, f, catalog);
        auto b = allowed_buckets(condition, f, catalog);
        bool overlap = false;
        for (const auto& v : a)
            if (std::find(b.begin(), b.end(), v) != b.end()) overlap = true;
        if (!overlap) return false;
    }
    return true;
}

}  // namespace

std::vector<std::string> check_rule_degradation_consistency(const RuleTable& rules,
                                                            const SimEnvironment& env,
                                                            const FeatureCatalog& catalog) {
    std::vector<std::string> violations;
    for (const auto& entry : rules.entries) {
        for (const auto& tool : entry.subroutine.tools) {
            if (!env.has_profile(tool, entry.subroutine.subtask_kind)) {
                violations.push_back("no profile for (" + tool + ", " +
                                     entry.subroutine.subtask_kind + ") used by " +
                                     entry.subroutine.id);
                continue;
            }
            const auto& p = env.profile(tool, entry.subroutine.subtask_kind);
            for (const auto& d : p.degradations) {
                if (d.quality_override >= 0.8) continue;  // not a failure-grade degradation
                if (conjunction_overlaps(entry.rule, d.condition, catalog))
                    violations.push_back(entry.subroutine.id + ": rule admits a context where " +
                                         tool + " degrades");
            }
        }
    }
    return violations;
}

}  // namespace toolpath
