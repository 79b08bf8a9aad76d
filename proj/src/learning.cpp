#include "toolpath/learning.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "toolpath/rng.hpp"

namespace toolpath {

std::string to_string(Proposal::Kind kind) {
    switch (kind) {
        case Proposal::Kind::AddRule: return "add_rule";
        case Proposal::Kind::ModifyPath: return "modify_path";
        case Proposal::Kind::ModifyRule: return "modify_rule";
    }
    return "add_rule";
}

bool refinement_due(long counter, long interval) {
    return counter > 0 && interval > 0 && counter % interval == 0;
}

// ---------------------------------------------------------------------------
// Contrast miner
// ---------------------------------------------------------------------------

namespace {

std::string join_path(const std::vector<ToolId>& tools) {
    std::string s;
    for (size_t i = 0; i < tools.size(); ++i) {
        if (i) s += ">";
        s += tools[i];
    }
    return s;
}

struct Group {
    SubtaskType subtask;
    std::vector<ToolId> path;
    std::vector<const ExecutionTrace*> successes;
    std::vector<const ExecutionTrace::Failure*> failures;
};

}  // namespace

std::vector<Proposal> baseline_mine(const std::vector<ExecutionTrace>& traces,
                                    const RuleTable& table, const FeatureCatalog& catalog,
                                    int min_support) {
    // group successful traces by (subtask kind, final path)
    std::map<std::pair<SubtaskType, std::string>, Group> groups;
    for (const auto& t : traces) {
        if (!t.success || t.final_path.empty()) continue;
        auto key = std::make_pair(t.subtask_kind, join_path(t.final_path));
        auto& g = groups[key];
        g.subtask = t.subtask_kind;
        g.path = t.final_path;
        g.successes.push_back(&t);
    }

    // a failure belongs to every same-subtask group whose path contains the
    // failing tool (the failure evidence for that path)
    for (const auto& t : traces) {
        for (const auto& f : t.failures) {
            for (auto& [key, g] : groups) {
                if (key.first != t.subtask_kind) continue;
                if (std::find(g.path.begin(), g.path.end(), f.tool) != g.path.end())
                    g.failures.push_back(&f);
            }
        }
    }

    std::vector<Proposal> proposals;
    for (auto& [key, g] : groups) {  // map order keeps emission deterministic
        if (static_cast<int>(g.successes.size()) < min_support) continue;

        ActivationRule rule;
        for (const auto& [feature, domain] : catalog.feature_domains) {
            std::set<std::string> succ_vals, fail_vals;
            size_t succ_with_feature = 0;
            for (const auto* t : g.successes)
                if (auto v = t->context.get(feature)) {
                    succ_vals.insert(*v);
                    ++succ_with_feature;
                }
            for (const auto* f : g.failures)
                if (auto v = f->context_at_failure.get(feature)) fail_vals.insert(*v);
            if (succ_vals.empty()) continue;

            std::vector<std::string> fail_only;
            for (const auto& v : fail_vals)
                if (!succ_vals.count(v)) fail_only.push_back(v);

            if (!fail_only.empty()) {
                // a value seen in failures and never in successes excludes it
                ActivationRule::Predicate p;
                p.feature = feature;
                p.op = fail_only.size() == 1 ? ActivationRule::Op::NotEquals
                                             : ActivationRule::Op::NotInSet;
                p.operands = fail_only;  // set-iteration order is sorted
                rule.predicates.push_back(std::move(p));
            } else if (fail_vals.empty() && succ_vals.size() == 1 &&
                       succ_with_feature == g.successes.size()) {
                // no failure evidence at all for this feature and a single
                // value covers every success
                ActivationRule::Predicate p;
                p.feature = feature;
                p.op = ActivationRule::Op::Equals;
                p.operands = {*succ_vals.begin()};
                rule.predicates.push_back(std::move(p));
            }
            // values seen on both sides are not the contributing factor
        }

        double cost_sum = 0.0, quality_sum = 0.0;
        for (const auto* t : g.successes) {
            cost_sum += t->path_cost;
            quality_sum += t->path_quality;
        }
        double n = static_cast<double>(g.successes.size());

        Proposal prop;
        prop.subtask_kind = g.subtask;
        prop.payload.subroutine.tools = g.path;
        prop.payload.subroutine.subtask_kind = g.subtask;
        prop.payload.rule = rule;
        prop.payload.avg_cost = cost_sum / n;
        prop.payload.avg_quality = quality_sum / n;
        prop.payload.usage_count = 0;
        {
            std::ostringstream note;
            note << "mined from " << g.successes.size() << " successes / " << g.failures.size()
                 << " failure records on " << join_path(g.path);
            prop.note = note.str();
            prop.payload.note = prop.note;
        }

        // an existing entry with the same path and subtask makes this a rule
        // modification rather than a new subroutine
        for (const auto& e : table.entries) {
            if (e.subroutine.subtask_kind == g.subtask && e.subroutine.tools == g.path) {
                prop.kind = Proposal::Kind::ModifyRule;
                prop.existing_id = e.subroutine.id;
                break;
            }
        }
        proposals.push_back(std::move(prop));
    }
    return proposals;
}

// ---------------------------------------------------------------------------
// Test datasets
// ---------------------------------------------------------------------------

TestDataset generate_test_dataset(const SubtaskType& kind, const std::vector<WorldState>& base_states,
                                  int n, std::uint64_t seed, const FeatureCatalog& catalog) {
    if (base_states.empty()) throw ValidationError("generate_test_dataset needs base states");
    const auto& def = catalog.subtask(kind);

    TestDataset ds;
    ds.kind = kind;
    SeedSequence root = SeedSequence(seed).with("dataset").with(kind);
    for (int i = 0; i < n; ++i) {
        SeedSequence task_seq = root.with(static_cast<std::uint64_t>(i));
        const WorldState& base = base_states[task_seq.below(base_states.size(), 1)];

        TaskSpec spec;
        spec.initial_state = base;
        spec.prompt = kind + " verification task " + std::to_string(i);

        int ops = 1 + static_cast<int>(task_seq.below(7, 2));  // 1-7 ops, seeded
        ops = std::min<int>(ops, static_cast<int>(base.objects.size()));
        ops = std::max(ops, 1);
        for (int k = 0; k < ops; ++k) {
            const auto& obj = base.objects[static_cast<size_t>(k) % base.objects.size()];
            SubtaskInstance op;
            op.kind = kind;
            op.source_object = obj.name;
            if (def.requires_target) op.target_object = obj.name + "_v" + std::to_string(k);
            spec.structured_ops.push_back(std::move(op));
        }
        // removal-style kinds cannot touch the same object twice
        if (def.effect == FeatureCatalog::SubtaskDef::Effect::DeleteSource ||
            def.effect == FeatureCatalog::SubtaskDef::Effect::RenameSource) {
            std::set<std::string> seen;
            auto& v = spec.structured_ops;
            v.erase(std::remove_if(v.begin(), v.end(),
                                   [&](const SubtaskInstance& s) {
                                       return !seen.insert(s.source_object).second;
                                   }),
                    v.end());
        }
        ds.tasks.push_back(std::move(spec));
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

std::pair<double, double> SimSystemEvaluator::evaluate(const RuleTable& table, ExecMode mode,
                                                       const std::vector<TaskSpec>& tasks) {
    last_stats_.clear();
    std::map<std::string, std::pair<double, double>> sums;  // id -> (cost, quality)
    std::map<std::string, long> uses;

    double cost_sum = 0.0, quality_sum = 0.0;
    std::uint64_t salt = 1;
    for (const auto& spec : tasks) {
        ExecutionConfig cfg;
        cfg.alpha = alpha_;
        cfg.mode = mode;
        cfg.q_thresh = q_thresh_;
        cfg.task_salt = salt++;
        auto [result, traces] = execute_task(spec, table, *kb_, *env_, cfg);
        cost_sum += result.total_cost;
        quality_sum += result.mean_quality;

        for (const auto& sr : result.subtasks) {
            if (!sr.fast) continue;
            // selection context is gone by now; attribute by (kind, path)
            for (const auto& e : table.entries) {
                if (e.subroutine.subtask_kind == sr.subtask.kind && e.subroutine.tools == sr.path) {
                    sums[e.subroutine.id].first += sr.cost;
                    sums[e.subroutine.id].second += sr.quality;
                    uses[e.subroutine.id]++;
                    break;
                }
            }
        }
    }
    for (const auto& [id, s] : sums) {
        double n = static_cast<double>(uses[id]);
        last_stats_[id] = {s.first / n, s.second / n, uses[id]};
    }
    double n = tasks.empty() ? 1.0 : static_cast<double>(tasks.size());
    return {cost_sum / n, quality_sum / n};
}

namespace {

RuleTable apply_change(const RuleTable& table, const Proposal& delta, std::string* touched_id) {
    RuleTable next = table;
    switch (delta.kind) {
        case Proposal::Kind::AddRule: {
            RuleEntry entry = delta.payload;
            entry.subroutine.id = next.next_id();
            *touched_id = entry.subroutine.id;
            next.entries.push_back(std::move(entry));
            break;
        }
        case Proposal::Kind::ModifyRule: {
            RuleEntry* e = next.find(delta.existing_id);
            if (!e) throw UnknownEntry("modify_rule targets unknown entry " + delta.existing_id);
            e->rule = delta.payload.rule;
            e->note = delta.payload.note;
            *touched_id = delta.existing_id;
            break;
        }
        case Proposal::Kind::ModifyPath: {
            RuleEntry* e = next.find(delta.existing_id);
            if (!e) throw UnknownEntry("modify_path targets unknown entry " + delta.existing_id);
            e->subroutine.tools = delta.payload.subroutine.tools;
            e->note = delta.payload.note;
            *touched_id = delta.existing_id;
            break;
        }
    }
    next.version += 1;
    return next;
}

std::vector<TaskSpec> sample_tasks(const TestDataset& ds, int n, SeedSequence seq) {
    std::vector<size_t> order(ds.tasks.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    // seeded Fisher-Yates, then take the head
    for (size_t i = order.size(); i > 1; --i) {
        size_t j = seq.below(i, i * 7919);
        std::swap(order[i - 1], order[j]);
    }
    std::vector<TaskSpec> out;
    for (size_t i = 0; i < order.size() && static_cast<int>(out.size()) < n; ++i)
        out.push_back(ds.tasks[order[i]]);
    return out;
}

}  // namespace

VerifyOutcome verify_proposal(const Proposal& delta, const RuleTable& table,
                              SystemEvaluator& evaluator,
                              const std::map<SubtaskType, TestDataset>& datasets,
                              const VerificationConfig& cfg, MinerAdapter& miner, bool first_cycle,
                              const FeatureCatalog& catalog, std::uint64_t salt) {
    auto ds_it = datasets.find(delta.subtask_kind);
    if (ds_it == datasets.end())
        throw MissingDataset("no verification dataset for subtask " + delta.subtask_kind);

    bool text_kind = catalog.subtask(delta.subtask_kind).family == SubtaskFamily::Text;
    int sample_n = text_kind ? cfg.sample_text_tasks : cfg.sample_image_tasks;

    VerifyOutcome out;
    out.table = table;

    Proposal current = delta;
    SeedSequence base = SeedSequence(cfg.rng_seed).with("verify").with(salt);

    for (int attempt = 0; attempt <= cfg.n_retries; ++attempt) {
        out.attempts = attempt + 1;
        std::vector<TaskSpec> sample =
            sample_tasks(ds_it->second, sample_n, base.with(static_cast<std::uint64_t>(attempt)));

        auto [c_base, q_base] =
            evaluator.evaluate(table, first_cycle ? ExecMode::SlowOnly : ExecMode::Adaptive, sample);
        if (c_base <= 0.0)
            throw DegenerateBaseline("baseline cost is not positive; percentages undefined");

        std::string touched;
        RuleTable candidate = apply_change(table, current, &touched);
        candidate.validate(catalog);
        auto [c_new, q_new] = evaluator.evaluate(candidate, ExecMode::Adaptive, sample);

        double delta_c_pct = (c_new - c_base) / c_base * 100.0;
        double delta_q_pct = q_base > 0.0 ? (q_new - q_base) / q_base * 100.0 : 0.0;
        out.net_benefit = delta_c_pct - delta_q_pct;

        if (out.net_benefit < 0.0) {
            // seed the touched entry's averages from the verification run
            if (auto* se = dynamic_cast<SimSystemEvaluator*>(&evaluator)) {
                auto stats = se->last_run_stats();
                auto it = stats.find(touched);
                RuleEntry* e = candidate.find(touched);
                if (it != stats.end() && it->second.uses > 0 && e) {
                    e->avg_cost = it->second.mean_cost;
                    e->avg_quality = it->second.mean_quality;
                    e->usage_count = it->second.uses;
                }
            }
            out.accepted = true;
            out.accepted_id = touched;
            out.table = std::move(candidate);
            return out;
        }

        if (attempt == cfg.n_retries) break;
        MinerFeedback fb;
        fb.c_base = c_base;
        fb.q_base = q_base;
        fb.c_new = c_new;
        fb.q_new = q_new;
        fb.net_benefit = out.net_benefit;
        auto refined = miner.refine(current, fb);
        if (!refined) break;  // the miner has nothing better to offer
        current = *refined;
    }
    return out;  // rejected: out.table is the untouched input table
}

std::pair<RuleTable, CycleReport> refinement_cycle(const TraceBuffer& buffer, const RuleTable& table,
                                                   SystemEvaluator& evaluator,
                                                   const std::map<SubtaskType, TestDataset>& datasets,
                                                   const VerificationConfig& cfg, MinerAdapter& miner,
                                                   const FeatureCatalog& catalog, long cycle_index) {
    CycleReport report;
    report.cycle = cycle_index;

    std::vector<ExecutionTrace> recent = buffer.recent(cfg.refinement_interval);
    std::vector<Proposal> proposals = miner.mine(recent, table, catalog);

    RuleTable current = table;
    bool first_cycle = cycle_index == 1;
    std::uint64_t salt = static_cast<std::uint64_t>(cycle_index) << 16;
    for (size_t i = 0; i < proposals.size(); ++i) {
        // proposals referencing an entry id are re-targeted against the
        // evolving table (an earlier acceptance may have added the entry)
        Proposal p = proposals[i];
        if (p.kind == Proposal::Kind::AddRule) {
            for (const auto& e : current.entries) {
                if (e.subroutine.subtask_kind == p.subtask_kind &&
                    e.subroutine.tools == p.payload.subroutine.tools) {
                    p.kind = Proposal::Kind::ModifyRule;
                    p.existing_id = e.subroutine.id;
                    break;
                }
            }
        }
        VerifyOutcome out;
        try {
            out = verify_proposal(p, current, evaluator, datasets, cfg, miner, first_cycle, catalog,
                                  salt + i);
        } catch (const MissingDataset&) {
            continue;  // nothing to verify against; skip the proposal
        }
        CycleReport::Row row;
        row.id = out.accepted ? out.accepted_id : join_path(p.payload.subroutine.tools);
        row.kind = p.kind;
        row.net_benefit = out.net_benefit;
        row.accepted = out.accepted;
        row.retries = out.attempts - 1;
        report.proposals.push_back(row);
        if (out.accepted) current = out.table;
    }
    return {current, report};
}

}  // namespace toolpath
