#include "toolpath/chain.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace toolpath {

SubtaskChain propose_chain_structured(const TaskSpec& spec, const FeatureCatalog& catalog) {
    if (spec.structured_ops.empty()) throw ValidationError("task has no structured ops");
    const size_t n = spec.structured_ops.size();

    for (const auto& op : spec.structured_ops) {
        const auto& def = catalog.subtask(op.kind);  // throws on unknown kind
        if (def.requires_target && op.target_object.empty())
            throw ValidationError(op.kind + " requires a target object");
    }

    // op i must follow op j when i reads the object j produces
    std::vector<std::vector<size_t>> needs(n);  // needs[i] = producers of i's source
    std::vector<int> indeg(n, 0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto& tgt = spec.structured_ops[j].target_object;
            if (!tgt.empty() && tgt == spec.structured_ops[i].source_object) {
                needs[i].push_back(j);
                ++indeg[i];
            }
        }
    }

    // stable Kahn: among ready ops, always take the smallest input index, so
    // an already-ordered spec comes back unchanged
    SubtaskChain chain;
    std::vector<bool> emitted(n, false);
    for (size_t produced = 0; produced < n; ++produced) {
        size_t pick = n;
        for (size_t i = 0; i < n; ++i)
            if (!emitted[i] && indeg[i] == 0) {
                pick = i;
                break;
            }
        if (pick == n) throw UnresolvableOrdering("circular object dependency between ops");
        emitted[pick] = true;
        indeg[pick] = -1;
        for (size_t i = 0; i < n; ++i)
            if (!emitted[i])
                for (size_t j : needs[i])
                    if (j == pick) --indeg[i];
        SubtaskInstance inst = spec.structured_ops[pick];
        inst.ordinal = static_cast<int>(chain.entries.size()) + 1;
        chain.entries.push_back(std::move(inst));
    }
    return chain;
}

ChainValidationReport validate_chain(const SubtaskChain& chain, const TaskSpec& spec) {
    ChainValidationReport rep;
    std::ostringstream msg;

    // linearity is structural here (a vector), ordinals must run 1..N
    for (size_t i = 0; i < chain.entries.size(); ++i) {
        if (chain.entries[i].ordinal != static_cast<int>(i) + 1) {
            rep.ordinals_consecutive = false;
            msg.str("");
            msg << "entry " << i << " has ordinal " << chain.entries[i].ordinal;
            rep.failures.push_back(msg.str());
        }
    }

    // dependency rule: nothing reads an object a later entry produces
    for (size_t i = 0; i < chain.entries.size(); ++i) {
        for (size_t j = i + 1; j < chain.entries.size(); ++j) {
            const auto& tgt = chain.entries[j].target_object;
            if (!tgt.empty() && tgt == chain.entries[i].source_object) {
                rep.dependencies_satisfied = false;
                rep.failures.push_back(chain.entries[i].label() + " reads an object produced by " +
                                       chain.entries[j].label());
            }
        }
    }

    // coverage: the chain is a permutation of the requested ops
    auto key = [](const SubtaskInstance& s) {
        return s.kind + "|" + s.source_object + "|" + s.target_object;
    };
    std::multiset<std::string> wanted, got;
    for (const auto& op : spec.structured_ops) wanted.insert(key(op));
    for (const auto& e : chain.entries) got.insert(key(e));
    if (wanted != got) {
        rep.covers_all_ops = false;
        for (const auto& k : wanted)
            if (got.count(k) < wanted.count(k)) {
                rep.failures.push_back("requested op missing from chain: " + k);
                break;
            }
        for (const auto& k : got)
            if (wanted.count(k) < got.count(k)) {
                rep.failures.push_back("chain contains unrequested op: " + k);
                break;
            }
    }
    return rep;
}

}  // namespace toolpath
