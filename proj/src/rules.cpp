#include "toolpath/rules.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "toolpath/astar.hpp"

namespace toolpath {

std::string to_string(ActivationRule::Op op) {
    switch (op) {
        case ActivationRule::Op::Equals: return "equals";
        case ActivationRule::Op::NotEquals: return "not_equals";
        case ActivationRule::Op::InSet: return "in_set";
        case ActivationRule::Op::NotInSet: return "not_in_set";
    }
    return "equals";
}

ActivationRule::Op rule_op_from_string(const std::string& s) {
    if (s == "equals") return ActivationRule::Op::Equals;
    if (s == "not_equals") return ActivationRule::Op::NotEquals;
    if (s == "in_set") return ActivationRule::Op::InSet;
    if (s == "not_in_set") return ActivationRule::Op::NotInSet;
    throw ValidationError("unknown predicate op: " + s);
}

void ActivationRule::validate(const FeatureCatalog& catalog) const {
    for (const auto& p : predicates) {
        if (!catalog.has_feature(p.feature))
            throw ValidationError("rule references undeclared feature: " + p.feature);
        if (p.operands.empty())
            throw ValidationError("predicate on " + p.feature + " has no operands");
        for (const auto& v : p.operands)
            if (!catalog.bucket_in_domain(p.feature, v))
                throw ValidationError("operand '" + v + "' outside the domain of feature '" +
                                      p.feature + "'");
    }
}

bool ActivationRule::operator==(const ActivationRule& o) const {
    if (predicates.size() != o.predicates.size()) return false;
    for (size_t i = 0; i < predicates.size(); ++i) {
        const auto& a = predicates[i];
        const auto& b = o.predicates[i];
        if (a.feature != b.feature || a.op != b.op || a.operands != b.operands) return false;
    }
    return true;
}

const RuleEntry* RuleTable::find(const std::string& id) const {
    for (const auto& e : entries)
        if (e.subroutine.id == id) return &e;
    return nullptr;
}

RuleEntry* RuleTable::find(const std::string& id) {
    for (auto& e : entries)
        if (e.subroutine.id == id) return &e;
    return nullptr;
}

std::string RuleTable::next_id() const {
    long max_n = 0;
    for (const auto& e : entries) {
        const auto& id = e.subroutine.id;
        if (id.rfind("SR", 0) == 0) {
            try {
                max_n = std::max(max_n, std::stol(id.substr(2)));
            } catch (...) {
            }
        }
    }
    return "SR" + std::to_string(max_n + 1);
}

void RuleTable::validate(const FeatureCatalog& catalog) const {
    std::set<std::string> ids;
    for (const auto& e : entries) {
        if (!ids.insert(e.subroutine.id).second)
            throw ValidationError("duplicate rule id: " + e.subroutine.id);
        if (e.subroutine.tools.empty())
            throw ValidationError("rule " + e.subroutine.id + " has an empty tool sequence");
        if (!catalog.has_subtask(e.subroutine.subtask_kind))
            throw ValidationError("rule " + e.subroutine.id + " names unknown subtask " +
                                  e.subroutine.subtask_kind);
        if (e.avg_quality < 0.0 || e.avg_quality > 1.0)
            throw ValidationError("rule " + e.subroutine.id + " has quality outside [0, 1]");
        if (e.usage_count > 0 && e.avg_cost <= 0.0)
            throw ValidationError("rule " + e.subroutine.id + " has non-positive average cost");
        e.rule.validate(catalog);
    }
}

bool rule_satisfied(const ActivationRule& rule, const ContextFeatures& ctx,
                    std::string* missing_note) {
    for (const auto& p : rule.predicates) {
        auto value = ctx.get(p.feature);
        if (!value) {
            if (missing_note) *missing_note = "missing feature: " + p.feature;
            return false;
        }
        bool in_operands =
            std::find(p.operands.begin(), p.operands.end(), *value) != p.operands.end();
        bool ok = false;
        switch (p.op) {
            case ActivationRule::Op::Equals:
            case ActivationRule::Op::InSet:
                ok = in_operands;
                break;
            case ActivationRule::Op::NotEquals:
            case ActivationRule::Op::NotInSet:
                ok = !in_operands;
                break;
        }
        if (!ok) return false;
    }
    return true;
}

double fast_plan_score(const RuleEntry& entry, const TradeoffAlpha& alpha) {
    return pair_score(entry.avg_cost, entry.avg_quality, alpha);
}

std::optional<Subroutine> select_subroutine(const SubtaskInstance& s, const ContextFeatures& ctx,
                                            const RuleTable& table, const TradeoffAlpha& alpha) {
    const RuleEntry* best = nullptr;
    double best_score = 0.0;
    for (const auto& e : table.entries) {
        if (e.subroutine.subtask_kind != s.kind) continue;
        if (!rule_satisfied(e.rule, ctx)) continue;
        double score = fast_plan_score(e, alpha);
        if (!best || score < best_score ||
            (score == best_score && e.subroutine.id < best->subroutine.id)) {
            best = &e;
            best_score = score;
        }
    }
    if (!best) return std::nullopt;
    return best->subroutine;
}

FastPlan build_fast_plan(const SubtaskChain& chain, const WorldState& state,
                         const RuleTable& table, const TradeoffAlpha& alpha,
                         const FeatureCatalog& catalog, bool plan_from_initial_state) {
    FastPlan plan;
    WorldState working = state;
    for (const auto& entry : chain.entries) {
        const WorldState& view = plan_from_initial_state ? state : working;
        ContextFeatures ctx;
        if (const auto* obj = view.find(entry.source_object)) ctx = obj->features;
        plan.assignments.push_back({entry, select_subroutine(entry, ctx, table, alpha)});
        if (!plan_from_initial_state) {
            ToolId terminal =
                plan.assignments.back().selected ? plan.assignments.back().selected->tools.back()
                                                 : ToolId{};
            apply_subtask_effect(working, entry, terminal, catalog);
        }
    }
    return plan;
}

void update_entry_stats(RuleTable& table, const std::string& id, double observed_cost,
                        double observed_quality) {
    RuleEntry* e = table.find(id);
    if (!e) throw UnknownEntry("no rule entry with id " + id);
    if (e->usage_count <= 0) {
        e->avg_cost = observed_cost;
        e->avg_quality = observed_quality;
        e->usage_count = 1;
        return;
    }
    double n = static_cast<double>(e->usage_count);
    e->avg_cost = (e->avg_cost * n + observed_cost) / (n + 1.0);
    e->avg_quality = (e->avg_quality * n + observed_quality) / (n + 1.0);
    e->usage_count += 1;
}

}  // namespace toolpath
