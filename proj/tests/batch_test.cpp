#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "toolpath/batch.hpp"
#include "toolpath/fixtures.hpp"
#include "toolpath/json_io.hpp"

using namespace toolpath;

namespace {

const KnowledgeBase& kb() {
    static KnowledgeBase k = fixtures::reference_knowledge();
    return k;
}

}  // namespace

TEST_CASE("shipped data files match the in-code fixtures exactly") {
    const std::string dir = TOOLPATH_DATA_DIR;
    CHECK(load_json_file(dir + "/features.json").dump() ==
          features_to_json(fixtures::reference_catalog()).dump());
    CHECK(load_json_file(dir + "/tdg.json").dump() == tdg_to_json(fixtures::reference_tdg()).dump());
    CHECK(load_json_file(dir + "/mdt.json").dump() == mdt_to_json(fixtures::reference_mdt()).dump());
    CHECK(load_json_file(dir + "/bt.json").dump() ==
          bt_to_json(fixtures::reference_benchmark()).dump());
    CHECK(load_json_file(dir + "/rules.json").dump() ==
          rules_to_json(fixtures::seeded_rule_table()).dump());
    FeatureCatalog catalog = fixtures::reference_catalog();
    CHECK(load_json_file(dir + "/sim.json").dump() ==
          sim_to_json(fixtures::reference_environment()).dump());
}

TEST_CASE("manifest loads and validates the shipped data directory") {
    const std::string dir = TOOLPATH_DATA_DIR;
    RunManifest m;
    m.features_path = dir + "/features.json";
    m.tdg_path = dir + "/tdg.json";
    m.mdt_path = dir + "/mdt.json";
    m.bt_path = dir + "/bt.json";
    m.rules_path = dir + "/rules.json";
    m.sim_path = dir + "/sim.json";
    CHECK_NOTHROW(m.load());
    CHECK(m.rules.entries.size() == 16);

    m.rules_path = dir + "/no-such-file.json";
    CHECK_THROWS_AS(m.load(), ValidationError);
}

TEST_CASE("battery runs are deterministic for a fixed seed") {
    Battery battery = build_reference_battery(42, kb());
    RuleTable rules = fixtures::seeded_rule_table();
    ExecutionConfig cfg;
    BatteryRunResult a = run_battery(battery.tasks, rules, kb(), battery.environment, cfg);
    BatteryRunResult b = run_battery(battery.tasks, rules, kb(), battery.environment, cfg);
    CHECK(battery_csv(a) == battery_csv(b));
    CHECK(a.mean_cost == b.mean_cost);
}

TEST_CASE("adaptive mode undercuts slow-only on the reference battery") {
    Battery battery = build_reference_battery(42, kb());
    RuleTable rules = fixtures::seeded_rule_table();
    ExecutionConfig cfg;
    cfg.mode = ExecMode::Adaptive;
    BatteryRunResult adaptive = run_battery(battery.tasks, rules, kb(), battery.environment, cfg);
    cfg.mode = ExecMode::SlowOnly;
    BatteryRunResult slow = run_battery(battery.tasks, rules, kb(), battery.environment, cfg);
    CHECK(adaptive.mean_cost < slow.mean_cost);
    CHECK(adaptive.mean_quality > slow.mean_quality - 0.03);
    CHECK(adaptive.mean_quality < slow.mean_quality + 0.03);
}

TEST_CASE("alpha sweep emits one row per alpha with monotone cost") {
    Battery battery = build_reference_battery(42, kb());
    RuleTable rules = fixtures::seeded_rule_table();
    std::vector<double> alphas{0.0, 1.0, 2.0};
    auto rows = sweep_alpha(battery.tasks, rules, kb(), battery.environment, ExecMode::Adaptive,
                            0.8, alphas);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].alpha == 0.0);
    CHECK(rows[1].mean_cost <= rows[0].mean_cost + 1e-9);
    CHECK(rows[2].mean_cost <= rows[1].mean_cost + 1e-9);

    auto single = sweep_alpha(battery.tasks, rules, kb(), battery.environment, ExecMode::Adaptive,
                              0.8, {1.0});
    CHECK(single.size() == 1);
}

TEST_CASE("learning stream: checkpoints, accepted rules and the final table") {
    LearningFixture fx = build_learning_fixture(7, kb(), 60);
    VerificationConfig vcfg;
    vcfg.rng_seed = 7;
    ExecutionConfig cfg;
    ContrastMiner miner;
    RuleTable empty;
    LearnRun run = run_learning_stream(fx.battery.tasks, empty, kb(), fx.battery.environment, cfg,
                                       vcfg, miner, fx.datasets);
    REQUIRE(run.checkpoints.size() == 3);
    CHECK(run.checkpoints[0].tasks_explored == 20);
    CHECK(run.checkpoints[0].fast_success_rate == 0.0);  // cold start window
    CHECK(run.checkpoints[1].fast_success_rate > 0.0);
    CHECK(run.checkpoints[2].fast_success_rate >= run.checkpoints[1].fast_success_rate);
    CHECK(run.final_rules.entries.size() >= 2);
    CHECK(learn_csv(run).rfind("tasks_explored", 0) == 0);

    // zero cycles: nothing learned, nothing changed
    LearnRun none = run_learning_stream({}, empty, kb(), fx.battery.environment, cfg, vcfg, miner,
                                        fx.datasets);
    CHECK(none.checkpoints.empty());
    CHECK(none.final_rules.entries.empty());
}

TEST_CASE("learned predicates equal the engineered failure conditions") {
    LearningFixture fx = build_learning_fixture(7, kb(), 40);
    VerificationConfig vcfg;
    vcfg.rng_seed = 7;
    ExecutionConfig cfg;
    ContrastMiner miner;
    RuleTable empty;
    LearnRun run = run_learning_stream(fx.battery.tasks, empty, kb(), fx.battery.environment, cfg,
                                       vcfg, miner, fx.datasets);
    REQUIRE_FALSE(run.final_rules.entries.empty());
    for (const auto& e : run.final_rules.entries) {
        auto it = fx.ground_truth.find(path_key(e.subroutine.tools, e.subroutine.subtask_kind));
        REQUIRE(it != fx.ground_truth.end());
        CHECK(e.rule == it->second);
    }
}
