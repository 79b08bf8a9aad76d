#include "toolpath/astar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace toolpath {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kScoreEps = 1e-12;
}  // namespace

void PathAccumulator::push(Step step) {
    cost_sum += step.cost;
    quality_product *= step.quality;
    steps.push_back(std::move(step));
}

bool PathAccumulator::consistent(double cost_tol, double quality_tol) const {
    double c = 0.0, q = 1.0;
    for (const auto& s : steps) {
        c += s.cost;
        q *= s.quality;
    }
    return std::abs(c - cost_sum) <= cost_tol && std::abs(q - quality_product) <= quality_tol;
}

double pair_score(double cost_sum, double quality_product, const TradeoffAlpha& alpha) {
    return std::pow(cost_sum, alpha.alpha) * std::pow(2.0 - quality_product, 2.0 - alpha.alpha);
}

double path_score(const PathAccumulator& acc, const TradeoffAlpha& alpha) {
    if (acc.empty()) return 0.0;
    return pair_score(acc.cost_sum, acc.quality_product, alpha);
}

HeuristicTable compute_heuristics(const ToolSubgraph& g, const BenchmarkTable& bt,
                                  const TradeoffAlpha& alpha) {
    HeuristicTable table;
    table.entries.assign(g.nodes.size(), {});

    auto order = g.topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int x = *it;
        auto& e = table.entries[static_cast<size_t>(x)];
        if (g.is_leaf(x)) {
            e = {0.0, 1.0, 0.0};
            continue;
        }
        if (g.adj[static_cast<size_t>(x)].empty()) {
            // dead end off every start->leaf path; never attractive
            e = {kInf, 0.0, kInf};
            continue;
        }
        double best = kInf;
        double best_cost = kInf, best_quality = 0.0;
        for (int y : g.adj[static_cast<size_t>(x)]) {
            const auto& hy = table.entries[static_cast<size_t>(y)];
            const auto& node = g.nodes[static_cast<size_t>(y)];
            const auto& bench = bt.at(node.tool, node.subtask.kind);
            double cost = hy.h_cost + bench.bench_cost;
            double quality = bench.bench_quality * hy.h_quality;
            double candidate = pair_score(cost, quality, alpha);
            if (candidate < best) {
                best = candidate;
                best_cost = cost;
                best_quality = quality;
            }
        }
        e = {best_cost, best_quality, best};
    }
    return table;
}

namespace {

// nondominated (cost up, quality down) suffix pairs per node, including the
// node's own benchmark values; recomputed when a node is abandoned so the
// incumbent bound tightens as branches die
class SuffixParetoTable {
public:
    SuffixParetoTable(const ToolSubgraph& g, const BenchmarkTable& bt) : g_(&g), bt_(&bt) {
        alive_.assign(g.nodes.size(), true);
        recompute();
    }

    void kill(int node) {
        alive_[static_cast<size_t>(node)] = false;
        recompute();
    }

    bool alive(int node) const { return alive_[static_cast<size_t>(node)]; }

    const std::vector<std::pair<double, double>>& suffixes(int node) const {
        return pareto_[static_cast<size_t>(node)];
    }

private:
    static void insert_nondominated(std::vector<std::pair<double, double>>& set, double c,
                                    double q) {
        for (const auto& [c2, q2] : set)
            if (c2 <= c && q2 >= q) return;  // dominated
        set.erase(std::remove_if(set.begin(), set.end(),
                                 [&](const std::pair<double, double>& p) {
                                     return c <= p.first && q >= p.second;
                                 }),
                  set.end());
        set.emplace_back(c, q);
    }

    void recompute() {
        pareto_.assign(g_->nodes.size(), {});
        auto order = g_->topological_order();
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int x = *it;
            if (x == 0 || !alive_[static_cast<size_t>(x)]) continue;
            const auto& node = g_->nodes[static_cast<size_t>(x)];
            const auto& bench = bt_->at(node.tool, node.subtask.kind);
            auto& set = pareto_[static_cast<size_t>(x)];
            if (g_->is_leaf(x)) insert_nondominated(set, bench.bench_cost, bench.bench_quality);
            for (int y : g_->adj[static_cast<size_t>(x)])
                for (const auto& [c, q] : pareto_[static_cast<size_t>(y)])
                    insert_nondominated(set, bench.bench_cost + c, bench.bench_quality * q);
            std::sort(set.begin(), set.end());
        }
    }

    const ToolSubgraph* g_;
    const BenchmarkTable* bt_;
    std::vector<bool> alive_;
    std::vector<std::vector<std::pair<double, double>>> pareto_;
};

struct Frontier {
    int node = 0;
    PathAccumulator acc;  // executed prefix, excluding `node`
    double f = 0.0;
    double priority = 0.0;
    long seq = 0;
};

struct FrontierOrder {
    const ToolSubgraph* g;
    bool operator()(const Frontier& a, const Frontier& b) const {
        if (a.priority != b.priority) return a.priority > b.priority;
        const auto& la = g->nodes[static_cast<size_t>(a.node)].label();
        const auto& lb = g->nodes[static_cast<size_t>(b.node)].label();
        if (la != lb) return la > lb;
        return a.seq > b.seq;
    }
};

ContextFeatures context_for(const WorldState& state, const SubtaskInstance& s) {
    if (const auto* obj = state.find(s.source_object)) return obj->features;
    return {};
}

}  // namespace

SearchOutcome astar_search(const ToolSubgraph& g, const TradeoffAlpha& alpha,
                           const BenchmarkTable& bt, ToolExecutor& executor, QualityChecker& vlm,
                           const SearchConfig& cfg, const WorldState& state,
                           const FeatureCatalog& catalog) {
    SearchOutcome out;
    out.final_state = state;

    HeuristicTable h = compute_heuristics(g, bt, alpha);
    SuffixParetoTable pareto(g, bt);

    auto estimate_f = [&](const Frontier& e) {
        const auto& node = g.nodes[static_cast<size_t>(e.node)];
        const auto& bench = bt.at(node.tool, node.subtask.kind);
        double ghat = pair_score(e.acc.cost_sum + bench.bench_cost,
                                 e.acc.quality_product * bench.bench_quality, alpha);
        return ghat + h.at(e.node).h_value;
    };

    // lowest provable final score of any completion of this entry: prefix
    // actuals combined with nondominated benchmark suffixes
    auto bound = [&](const Frontier& e) {
        double best = kInf;
        for (const auto& [c, q] : pareto.suffixes(e.node))
            best = std::min(best,
                            pair_score(e.acc.cost_sum + c, e.acc.quality_product * q, alpha));
        return best;
    };

    // expansion priority: f = g + h floored by the provable completion
    // bound. At alpha > 1 the additive f underestimates whole completions
    // (cost sums are superadditive under the exponent), which would drag
    // backup branches ahead of the first complete path; the floor keeps the
    // order consistent with what the entry can actually achieve.
    auto priority = [&](const Frontier& e) { return std::max(e.f, bound(e)); };

    std::priority_queue<Frontier, std::vector<Frontier>, FrontierOrder> queue{FrontierOrder{&g}};
    long seq = 0;
    for (int child : g.adj[0]) {
        Frontier e{child, {}, 0.0, 0.0, seq++};
        e.f = estimate_f(e);
        e.priority = priority(e);
        queue.push(e);
    }

    bool have_incumbent = false;
    PathAccumulator best_path;
    double best_score = kInf;

    std::vector<double> node_best_g(g.nodes.size(), kInf);

    while (!queue.empty()) {
        Frontier e = queue.top();
        queue.pop();
        if (!pareto.alive(e.node)) continue;
        if (pareto.suffixes(e.node).empty()) continue;  // no surviving completion below
        if (have_incumbent && bound(e) >= best_score - kScoreEps) continue;

        const auto& node = g.nodes[static_cast<size_t>(e.node)];
        ContextFeatures ctx = context_for(state, node.subtask);

        out.expansions++;
        ToolRun run = executor.run(node.tool, node.subtask, ctx, 0);
        out.total_executed_cost += run.cost;
        double paid = run.cost;
        double quality = vlm.score(run, node.subtask, node.tool);

        int attempt = 0;
        while (quality < cfg.q_thresh && attempt < cfg.max_retries) {
            out.vlm_failures++;
            out.failures.push_back({node.tool, ctx});
            ++attempt;
            out.retries++;
            if (cfg.keep_log)
                out.log.push_back({node.label(), path_score(e.acc, alpha), h.at(e.node).h_value,
                                   e.f, "retry"});
            run = executor.run(node.tool, node.subtask, ctx, attempt);
            out.total_executed_cost += run.cost;
            paid += run.cost;
            quality = vlm.score(run, node.subtask, node.tool);
        }

        if (quality < cfg.q_thresh) {
            out.vlm_failures++;
            out.failures.push_back({node.tool, ctx});
            pareto.kill(e.node);
            if (cfg.keep_log)
                out.log.push_back({node.label(), path_score(e.acc, alpha), h.at(e.node).h_value,
                                   e.f, "abandon"});
            continue;
        }

        PathAccumulator acc = e.acc;
        acc.push({node.tool, node.subtask, paid, quality});
        double gval = path_score(acc, alpha);
        // per-node g starts at infinity and relaxes as cheaper arrivals land;
        // the full accumulator still travels with every frontier entry
        auto& best_g = node_best_g[static_cast<size_t>(e.node)];
        best_g = std::min(best_g, gval);
        if (cfg.keep_log)
            out.log.push_back({node.label(), best_g, h.at(e.node).h_value, e.f, "expand"});

        if (g.is_leaf(e.node)) {
            if (!have_incumbent || gval < best_score - kScoreEps) {
                have_incumbent = true;
                best_score = gval;
                best_path = acc;
                if (cfg.keep_log)
                    out.log.push_back({node.label(), gval, 0.0, gval, "goal"});
            }
        }
        for (int child : g.adj[static_cast<size_t>(e.node)]) {
            if (!pareto.alive(child)) continue;
            Frontier c{child, acc, 0.0, 0.0, seq++};
            c.f = estimate_f(c);
            c.priority = priority(c);
            if (have_incumbent && bound(c) >= best_score - kScoreEps) continue;
            queue.push(c);
        }
    }

    if (!have_incumbent) {
        SearchExhausted ex("every path through the subgraph failed the quality gate");
        ex.explored_cost = out.total_executed_cost;
        ex.expansions = out.expansions;
        ex.retries = out.retries;
        ex.vlm_failures = out.vlm_failures;
        ex.failures = out.failures;
        throw ex;
    }

    out.path = best_path;
    out.score = best_score;

    // apply each completed subtask's nominal effect in path order
    for (size_t i = 0; i < best_path.steps.size(); ++i) {
        bool segment_end = (i + 1 == best_path.steps.size()) ||
                           (best_path.steps[i + 1].subtask.ordinal != best_path.steps[i].subtask.ordinal);
        if (segment_end)
            apply_subtask_effect(out.final_state, best_path.steps[i].subtask,
                                 best_path.steps[i].tool, catalog);
    }
    return out;
}

}  // namespace toolpath
