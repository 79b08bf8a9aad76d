#include <doctest.h>

#include <cmath>

#include "support/fixture_helpers.hpp"
#include "support/oracle.hpp"
#include "toolpath/astar.hpp"
#include "toolpath/fixtures.hpp"

using namespace toolpath;
using toolpath::testing::valid_random_fixture;

namespace {

PathAccumulator acc_of(std::vector<std::pair<double, double>> steps) {
    PathAccumulator acc;
    int i = 0;
    for (const auto& [c, q] : steps) {
        SubtaskInstance s;
        s.kind = "Synthetic";
        s.ordinal = 1;
        acc.push({"t" + std::to_string(++i), s, c, q});
    }
    return acc;
}

// hand-built graph: start -> a -> {b, c}; b and c are leaves
struct TwoBranch {
    ToolSubgraph g;
    BenchmarkTable bt;
    SimEnvironment env;
    WorldState state;

    TwoBranch(double cb, double qb, double cc, double qc) {
        SubtaskInstance s{"Synthetic", "x", "", 1, {}};
        state.objects.push_back({"x", {}});
        g.nodes.push_back({"", {}, true});
        g.nodes.push_back({"a", s, false});
        g.nodes.push_back({"b", s, false});
        g.nodes.push_back({"c", s, false});
        g.adj = {{1}, {2, 3}, {}, {}};
        g.radj = {{}, {0}, {1}, {1}};
        g.leaves = {2, 3};
        set_tool("a", 1.0, 0.95);
        set_tool("b", cb, qb);
        set_tool("c", cc, qc);
    }

    void set_tool(const ToolId& tool, double cost, double quality) {
        bt.entries[{tool, "Synthetic"}] = {cost, quality};
        SimToolProfile p;
        p.tool = tool;
        p.subtask_kind = "Synthetic";
        p.base_cost = cost;
        p.base_quality = quality;
        env.profiles[{tool, "Synthetic"}] = p;
    }
};

SearchOutcome run_search(const ToolSubgraph& g, const BenchmarkTable& bt, const SimEnvironment& env,
                         const WorldState& state, double alpha, double q_thresh = 0.8) {
    SimToolExecutor exec(env, 0);
    SimQualityChecker vlm;
    SearchConfig cfg;
    cfg.q_thresh = q_thresh;
    FeatureCatalog catalog;
    catalog.subtasks.push_back({"Synthetic", SubtaskFamily::Neutral,
                                FeatureCatalog::SubtaskDef::Effect::None, false});
    return astar_search(g, TradeoffAlpha(alpha), bt, exec, vlm, cfg, state, catalog);
}

}  // namespace

TEST_CASE("path score reproduces the worked accumulator values") {
    CHECK(path_score(acc_of({{10.0, 0.9}}), TradeoffAlpha(1.0)) == doctest::Approx(11.0).epsilon(1e-9));
    CHECK(path_score(PathAccumulator{}, TradeoffAlpha(0.0)) == 0.0);
    CHECK(path_score(PathAccumulator{}, TradeoffAlpha(1.0)) == 0.0);
    CHECK(path_score(acc_of({{10.0, 0.9}, {5.0, 0.8}}), TradeoffAlpha(2.0)) ==
          doctest::Approx(225.0).epsilon(1e-9));
}

TEST_CASE("accumulator consistency invariant") {
    auto acc = acc_of({{10.0, 0.9}, {5.0, 0.8}, {0.25, 0.999}});
    CHECK(acc.consistent());
    CHECK(acc.cost_sum == doctest::Approx(15.25));
    CHECK(acc.quality_product == doctest::Approx(0.9 * 0.8 * 0.999));
}

TEST_CASE("heuristics: leaf base case and one-step recursion") {
    TwoBranch fx(10.0, 0.9, 20.0, 0.99);
    HeuristicTable h = compute_heuristics(fx.g, fx.bt, TradeoffAlpha(1.0));
    CHECK(h.at(2).h_value == 0.0);
    CHECK(h.at(2).h_cost == 0.0);
    CHECK(h.at(2).h_quality == 1.0);
    // node a sees (0+10)*(2-0.9*1) = 11 and (0+20)*(2-0.99*1) = 20.2; keeps 11
    CHECK(h.at(1).h_value == doctest::Approx(11.0).epsilon(1e-9));
    CHECK(h.at(1).h_cost == doctest::Approx(10.0));
    CHECK(h.at(1).h_quality == doctest::Approx(0.9));
}

TEST_CASE("heuristic with a single leaf neighbor") {
    TwoBranch fx(10.0, 0.9, 20.0, 0.99);
    fx.g.adj[1] = {2};  // drop branch c
    fx.g.radj[3] = {};
    fx.g.leaves = {2};
    HeuristicTable h = compute_heuristics(fx.g, fx.bt, TradeoffAlpha(1.0));
    CHECK(h.at(1).h_value == doctest::Approx(11.0).epsilon(1e-9));
}

TEST_CASE("single-path subgraph: expansions equal path length") {
    TwoBranch fx(10.0, 0.9, 20.0, 0.99);
    fx.g.adj[1] = {2};
    fx.g.radj[3] = {};
    fx.g.leaves = {2};
    SearchOutcome out = run_search(fx.g, fx.bt, fx.env, fx.state, 1.0);
    CHECK(out.expansions == 2);
    REQUIRE(out.path.steps.size() == 2);
    CHECK(out.path.steps[0].tool == "a");
    CHECK(out.path.steps[1].tool == "b");
}

TEST_CASE("search returns the brute-force argmin on a two-branch graph") {
    TwoBranch fx(10.0, 0.9, 20.0, 0.99);
    SearchOutcome out = run_search(fx.g, fx.bt, fx.env, fx.state, 1.0);
    auto scored = oracle::score_paths(fx.g, fx.env, fx.state, 1.0, 0.8, 0);
    const auto* best = oracle::argmin(scored);
    REQUIRE(best != nullptr);
    CHECK(out.score == doctest::Approx(best->score).epsilon(1e-12));
    CHECK(out.path.steps.back().tool ==
          fx.g.nodes[static_cast<size_t>(best->nodes.back())].tool);
}

TEST_CASE("gated branch is abandoned and the second-best path wins") {
    TwoBranch fx(10.0, 0.9, 20.0, 0.99);
    // cheapest terminal fails its quality check outright
    fx.env.profiles.at({"b", "Synthetic"}).base_quality = 0.3;
    SearchOutcome out = run_search(fx.g, fx.bt, fx.env, fx.state, 1.0);
    CHECK(out.path.steps.back().tool == "c");
    CHECK(out.vlm_failures >= 1);
    CHECK(out.retries == 1);
    // sunk cost of the failed branch is billed: a + b + b(retry) + c
    CHECK(out.total_executed_cost == doctest::Approx(1.0 + 10.0 + 10.0 + 20.0));
    auto scored = oracle::score_paths(fx.g, fx.env, fx.state, 1.0, 0.8, 0);
    const auto* best = oracle::argmin(scored);
    REQUIRE(best != nullptr);
    CHECK(out.score == doctest::Approx(best->score).epsilon(1e-12));
}

TEST_CASE("search throws SearchExhausted when every path is gated off") {
    TwoBranch fx(10.0, 0.9, 20.0, 0.99);
    fx.env.profiles.at({"a", "Synthetic"}).base_quality = 0.2;
    CHECK_THROWS_AS(run_search(fx.g, fx.bt, fx.env, fx.state, 1.0), SearchExhausted);
    try {
        run_search(fx.g, fx.bt, fx.env, fx.state, 1.0);
    } catch (const SearchExhausted& ex) {
        CHECK(ex.explored_cost == doctest::Approx(2.0));  // a twice
        CHECK(ex.failures.size() == 2);
    }
}

TEST_CASE("boundary quality exactly at the threshold passes the gate") {
    TwoBranch fx(10.0, 0.8, 20.0, 0.99);
    SearchOutcome out = run_search(fx.g, fx.bt, fx.env, fx.state, 2.0);  // cost-only: picks b
    CHECK(out.path.steps.back().tool == "b");
    CHECK(out.vlm_failures == 0);
}

TEST_CASE("oracle equivalence on seeded random subgraphs across the alpha grid") {
    const double alphas[] = {0.0, 0.5, 1.0, 1.5, 2.0};
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        auto fx = valid_random_fixture(seed);
        for (double alpha : alphas) {
            SearchOutcome out = run_search(fx.graph, fx.bt, fx.env, fx.state, alpha);
            auto scored = oracle::score_paths(fx.graph, fx.env, fx.state, alpha, 0.8, 0);
            const auto* best = oracle::argmin(scored);
            REQUIRE(best != nullptr);
            REQUIRE(out.score == doctest::Approx(best->score).epsilon(1e-12));
            REQUIRE(out.path.steps.size() == best->nodes.size());
            for (size_t i = 0; i < best->nodes.size(); ++i)
                REQUIRE(out.path.steps[i].tool ==
                        fx.graph.nodes[static_cast<size_t>(best->nodes[i])].tool);
        }
    }
}

TEST_CASE("heuristic admissibility against brute-forced cost-to-go") {
    // benchmark-exact fixtures: h(x) must not exceed the score of the best
    // completion from x, i.e. the minimal standalone g-contribution over every
    // complete suffix that continues past x
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto fx = valid_random_fixture(seed ^ 0xabcd);
        for (double alpha : {0.0, 0.5, 1.0, 1.5, 2.0}) {
            HeuristicTable h = compute_heuristics(fx.graph, fx.bt, TradeoffAlpha(alpha));
            std::vector<double> best_to_go(fx.graph.nodes.size(),
                                           std::numeric_limits<double>::infinity());
            for (const auto& path : oracle::enumerate_paths(fx.graph)) {
                // suffix score after position i (cost-to-go from path[i])
                for (size_t i = 0; i < path.size(); ++i) {
                    double cost = 0.0, quality = 1.0;
                    for (size_t k = i + 1; k < path.size(); ++k) {
                        const auto& node = fx.graph.nodes[static_cast<size_t>(path[k])];
                        const auto& e = fx.bt.at(node.tool, "Synthetic");
                        cost += e.bench_cost;
                        quality *= e.bench_quality;
                    }
                    double to_go = (i + 1 == path.size())
                                       ? 0.0
                                       : oracle::formula(cost, quality, alpha);
                    best_to_go[static_cast<size_t>(path[i])] =
                        std::min(best_to_go[static_cast<size_t>(path[i])], to_go);
                }
            }
            for (size_t n = 1; n < fx.graph.nodes.size(); ++n)
                if (std::isfinite(best_to_go[n]))
                    CHECK(h.at(static_cast<int>(n)).h_value <= best_to_go[n] + 1e-9);
        }
    }
}

TEST_CASE("alpha-monotonicity: the chosen path's raw cost never rises with alpha") {
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        auto fx = valid_random_fixture(seed);
        double prev_cost = std::numeric_limits<double>::infinity();
        for (double alpha : {0.0, 0.5, 1.0, 1.5, 2.0}) {
            SearchOutcome out = run_search(fx.graph, fx.bt, fx.env, fx.state, alpha);
            CHECK(out.path.cost_sum <= prev_cost + 1e-9);
            prev_cost = out.path.cost_sum;
        }
    }
}

TEST_CASE("scaling every cost by k leaves the chosen path unchanged") {
    for (std::uint64_t seed = 200; seed < 220; ++seed) {
        auto fx = valid_random_fixture(seed);
        SearchOutcome base = run_search(fx.graph, fx.bt, fx.env, fx.state, 1.0);

        auto scaled = fx;
        for (auto& [key, e] : scaled.bt.entries) e.bench_cost *= 3.7;
        for (auto& [key, p] : scaled.env.profiles) p.base_cost *= 3.7;
        SearchOutcome out = run_search(scaled.graph, scaled.bt, scaled.env, scaled.state, 1.0);

        REQUIRE(out.path.steps.size() == base.path.steps.size());
        for (size_t i = 0; i < out.path.steps.size(); ++i)
            CHECK(out.path.steps[i].tool == base.path.steps[i].tool);
        // scores scale by k^alpha, paths must not change
        CHECK(out.score == doctest::Approx(base.score * 3.7).epsilon(1e-9));
    }
}

TEST_CASE("quality-only search is exact when f overestimates a longer path") {
    // at alpha = 0 both g and h carry the squared quality penalty, so
    // f = g + h roughly doubles the score of a long high-quality path; a
    // short mediocre leaf then dequeues first. The incumbent bound must
    // still deliver the true argmin: the three-step 0.99 path (score
    // (2-0.99^3)^2) beats the single 0.93 step ((2-0.93)^2).
    SubtaskInstance s{"Synthetic", "x", "", 1, {}};
    ToolSubgraph g;
    g.nodes.push_back({"", {}, true});
    g.nodes.push_back({"short", s, false});
    g.nodes.push_back({"a", s, false});
    g.nodes.push_back({"b", s, false});
    g.nodes.push_back({"c", s, false});
    g.adj = {{1, 2}, {}, {3}, {4}, {}};
    g.radj = {{}, {0}, {0}, {2}, {3}};
    g.leaves = {1, 4};

    BenchmarkTable bt;
    SimEnvironment env;
    WorldState state;
    state.objects.push_back({"x", {}});
    auto set_tool = [&](const ToolId& tool, double cost, double quality) {
        bt.entries[{tool, "Synthetic"}] = {cost, quality};
        SimToolProfile p;
        p.tool = tool;
        p.subtask_kind = "Synthetic";
        p.base_cost = cost;
        p.base_quality = quality;
        env.profiles[{tool, "Synthetic"}] = p;
    };
    set_tool("short", 1.0, 0.93);
    set_tool("a", 1.0, 0.99);
    set_tool("b", 1.0, 0.99);
    set_tool("c", 1.0, 0.99);

    SearchOutcome out = run_search(g, bt, env, state, 0.0);
    REQUIRE(out.path.steps.size() == 3);
    CHECK(out.path.steps.back().tool == "c");
    auto scored = oracle::score_paths(g, env, state, 0.0, 0.8, 0);
    const auto* best = oracle::argmin(scored);
    REQUIRE(best != nullptr);
    CHECK(out.score == doctest::Approx(best->score).epsilon(1e-12));
}

TEST_CASE("search log records expansions and abandonments") {
    TwoBranch fx(10.0, 0.9, 20.0, 0.99);
    fx.env.profiles.at({"b", "Synthetic"}).base_quality = 0.3;
    SimToolExecutor exec(fx.env, 0);
    SimQualityChecker vlm;
    SearchConfig cfg;
    cfg.keep_log = true;
    FeatureCatalog catalog;
    catalog.subtasks.push_back({"Synthetic", SubtaskFamily::Neutral,
                                FeatureCatalog::SubtaskDef::Effect::None, false});
    SearchOutcome out =
        astar_search(fx.g, TradeoffAlpha(1.0), fx.bt, exec, vlm, cfg, fx.state, catalog);
    bool saw_abandon = false, saw_expand = false, saw_retry = false;
    for (const auto& rec : out.log) {
        saw_abandon |= rec.action == "abandon";
        saw_expand |= rec.action == "expand";
        saw_retry |= rec.action == "retry";
    }
    CHECK(saw_abandon);
    CHECK(saw_expand);
    CHECK(saw_retry);
}
