#include <doctest.h>

#include <algorithm>

#include "support/fixture_helpers.hpp"
#include "toolpath/batch.hpp"
#include "toolpath/fixtures.hpp"
#include "toolpath/json_io.hpp"
#include "toolpath/learning.hpp"

using namespace toolpath;
using toolpath::testing::ctx;

namespace {

const KnowledgeBase& kb() {
    static KnowledgeBase k = fixtures::reference_knowledge();
    return k;
}

ExecutionTrace trace(const SubtaskType& kind, std::vector<ToolId> path, ContextFeatures c,
                     bool success, std::vector<ExecutionTrace::Failure> failures = {},
                     double cost = 10.0, double quality = 0.9) {
    ExecutionTrace t;
    t.subtask_kind = kind;
    t.final_path = std::move(path);
    t.context = std::move(c);
    t.success = success;
    t.failures = std::move(failures);
    t.path_cost = cost;
    t.path_quality = quality;
    return t;
}

// canned measurements for the verification harness
class StubEvaluator final : public SystemEvaluator {
public:
    std::pair<double, double> baseline{46.8, 0.93};
    std::pair<double, double> candidate{29.5, 0.91};
    int calls = 0;

    std::pair<double, double> evaluate(const RuleTable&, ExecMode mode,
                                       const std::vector<TaskSpec>&) override {
        ++calls;
        return mode == ExecMode::SlowOnly ? baseline : candidate;
    }
};

// adaptive-mode stub distinguishing baseline (pre-change) from candidate
// tables by entry count
class TableAwareStub final : public SystemEvaluator {
public:
    size_t base_entries;
    std::pair<double, double> baseline, candidate;
    TableAwareStub(size_t base, std::pair<double, double> b, std::pair<double, double> c)
        : base_entries(base), baseline(b), candidate(c) {}
    std::pair<double, double> evaluate(const RuleTable& table, ExecMode,
                                       const std::vector<TaskSpec>&) override {
        return table.entries.size() == base_entries ? baseline : candidate;
    }
};

Proposal simple_proposal(const SubtaskType& kind) {
    Proposal p;
    p.kind = Proposal::Kind::AddRule;
    p.subtask_kind = kind;
    p.payload.subroutine.tools = {"YOLO", "SAM", "SD_Inpaint"};
    p.payload.subroutine.subtask_kind = kind;
    p.payload.avg_cost = 11.0;
    p.payload.avg_quality = 0.9;
    return p;
}

std::map<SubtaskType, TestDataset> tiny_datasets(const SubtaskType& kind) {
    WorldState st;
    st.objects.push_back({"o", ctx({{"object_size", "medium"}})});
    std::map<SubtaskType, TestDataset> ds;
    ds[kind] = generate_test_dataset(kind, {st}, 30, 9, kb().catalog);
    return ds;
}

}  // namespace

TEST_CASE("trace records round-trip through the json-lines form") {
    ExecutionTrace t = trace("Object Recoloration", {"YOLO", "SAM", "SD_Inpaint"},
                             ctx({{"object_size", "tiny"}, {"color_transition", "mild"}}), false,
                             {{"SD_Inpaint", ctx({{"object_size", "tiny"}})}}, 12.5, 0.42);
    std::string line = trace_to_jsonl(t);
    ExecutionTrace back = parse_trace_line(line, kb().catalog);
    CHECK(back.subtask_kind == t.subtask_kind);
    CHECK(back.final_path == t.final_path);
    CHECK(back.context == t.context);
    CHECK(back.path_cost == t.path_cost);
    CHECK(back.path_quality == t.path_quality);
    CHECK(back.success == t.success);
    REQUIRE(back.failures.size() == 1);
    CHECK(back.failures[0].tool == "SD_Inpaint");
    CHECK(trace_to_jsonl(back) == line);
}

TEST_CASE("refinement trigger fires every K tasks and never at zero") {
    CHECK(refinement_due(20, 20));
    CHECK_FALSE(refinement_due(0, 20));
    CHECK_FALSE(refinement_due(41, 20));
    CHECK(refinement_due(40, 20));
}

TEST_CASE("trace buffer returns the most recent window") {
    TraceBuffer buf;
    for (int t = 0; t < 5; ++t)
        buf.add_task({trace("Object Removal", {"YOLO"}, {}, true),
                      trace("Object Removal", {"YOLO"}, {}, true)});
    CHECK(buf.task_counter == 5);
    CHECK(buf.traces.size() == 10);
    CHECK(buf.recent(2).size() == 4);
    CHECK(buf.recent(100).size() == 10);
}

TEST_CASE("contrast miner recovers the worked two-path example") {
    // path P1 fails on extreme transitions regardless of size; P2 fails only
    // on small sizes
    std::vector<ToolId> p1{"YOLO", "SAM", "SD_Inpaint"};
    std::vector<ToolId> p2{"SD_SearchRecolor"};
    auto rc = [&](const std::string& size, const std::string& transition) {
        return ctx({{"object_size", size}, {"color_transition", transition}});
    };
    std::vector<ExecutionTrace> traces;
    // P1 successes across sizes, never extreme
    traces.push_back(trace("Object Recoloration", p1, rc("tiny", "mild"), true));
    traces.push_back(trace("Object Recoloration", p1, rc("huge", "moderate"), true));
    traces.push_back(trace("Object Recoloration", p1, rc("medium", "mild"), true));
    // P1 failures at extreme transitions, both sizes -> only the transition discriminates
    traces.push_back(trace("Object Recoloration", p2, rc("huge", "extreme_luminance"), true,
                           {{"SD_Inpaint", rc("huge", "extreme_luminance")}}));
    traces.push_back(trace("Object Recoloration", p2, rc("medium", "extreme_luminance"), true,
                           {{"SD_Inpaint", rc("medium", "extreme_luminance")}}));
    // P2 needs support too; its failure is a small-size context
    traces.push_back(trace("Object Recoloration", p2, rc("large", "moderate"), true));
    traces.push_back(trace("Object Recoloration", {}, rc("small", "extreme_luminance"), false,
                           {{"SD_SearchRecolor", rc("small", "extreme_luminance")}}));

    RuleTable empty;
    auto proposals = baseline_mine(traces, empty, kb().catalog, 3);
    REQUIRE(proposals.size() == 2);  // map order: SD_SearchRecolor before YOLO>SAM>...

    const Proposal* for_p1 = nullptr;
    const Proposal* for_p2 = nullptr;
    for (const auto& p : proposals) {
        if (p.payload.subroutine.tools == p1) for_p1 = &p;
        if (p.payload.subroutine.tools == p2) for_p2 = &p;
    }
    REQUIRE(for_p1);
    REQUIRE(for_p2);

    REQUIRE(for_p1->payload.rule.predicates.size() == 1);
    CHECK(for_p1->payload.rule.predicates[0].feature == "color_transition");
    CHECK(for_p1->payload.rule.predicates[0].op == ActivationRule::Op::NotEquals);
    CHECK(for_p1->payload.rule.predicates[0].operands ==
          std::vector<std::string>{"extreme_luminance"});

    REQUIRE(for_p2->payload.rule.predicates.size() == 1);
    CHECK(for_p2->payload.rule.predicates[0].feature == "object_size");
    CHECK(for_p2->payload.rule.predicates[0].op == ActivationRule::Op::NotEquals);
    CHECK(for_p2->payload.rule.predicates[0].operands == std::vector<std::string>{"small"});
}

TEST_CASE("an all-success uniform group pins its covering bucket") {
    std::vector<ExecutionTrace> traces;
    for (int i = 0; i < 4; ++i)
        traces.push_back(trace("Object Removal", {"YOLO", "SAM", "SD_Erase"},
                               ctx({{"background_content_type", "Simple_Texture"}}), true));
    RuleTable empty;
    auto proposals = baseline_mine(traces, empty, kb().catalog, 3);
    REQUIRE(proposals.size() == 1);
    REQUIRE(proposals[0].payload.rule.predicates.size() == 1);
    CHECK(proposals[0].payload.rule.predicates[0].op == ActivationRule::Op::Equals);
    CHECK(proposals[0].payload.rule.predicates[0].operands ==
          std::vector<std::string>{"Simple_Texture"});
}

TEST_CASE("groups below min_support are ignored; subtasks are never pooled") {
    std::vector<ExecutionTrace> traces;
    traces.push_back(trace("Object Removal", {"YOLO", "SAM", "SD_Erase"}, {}, true));
    traces.push_back(trace("Object Removal", {"YOLO", "SAM", "SD_Erase"}, {}, true));
    // same path under a different subtask kind: counted separately
    traces.push_back(trace("Object Recoloration", {"YOLO", "SAM", "SD_Erase"}, {}, true));
    RuleTable empty;
    CHECK(baseline_mine(traces, empty, kb().catalog, 3).empty());
}

TEST_CASE("trace order within a group does not change the mined predicates") {
    auto rc = [&](const std::string& size) {
        return ctx({{"object_size", size}, {"color_transition", "mild"}});
    };
    std::vector<ExecutionTrace> traces;
    traces.push_back(trace("Object Recoloration", {"SD_SearchRecolor"}, rc("large"), true));
    traces.push_back(trace("Object Recoloration", {"SD_SearchRecolor"}, rc("medium"), true));
    traces.push_back(trace("Object Recoloration", {"SD_SearchRecolor"}, rc("huge"), true));
    traces.push_back(trace("Object Recoloration", {}, rc("tiny"), false,
                           {{"SD_SearchRecolor", rc("tiny")}}));
    RuleTable empty;
    auto a = baseline_mine(traces, empty, kb().catalog, 3);
    std::reverse(traces.begin(), traces.end());
    auto b = baseline_mine(traces, empty, kb().catalog, 3);
    REQUIRE(a.size() == 1);
    REQUIRE(b.size() == 1);
    CHECK(a[0].payload.rule == b[0].payload.rule);
}

TEST_CASE("test dataset generation: exclusively of one kind, 1-7 ops, seeded") {
    WorldState st;
    for (int i = 0; i < 8; ++i) st.objects.push_back({"o" + std::to_string(i), {}});
    TestDataset ds = generate_test_dataset("Object Removal", {st}, 25, 5, kb().catalog);
    CHECK(ds.tasks.size() == 25);
    bool multi = false;
    for (const auto& t : ds.tasks) {
        CHECK(!t.structured_ops.empty());
        CHECK(t.structured_ops.size() <= 7);
        multi |= t.structured_ops.size() > 1;
        for (const auto& op : t.structured_ops) CHECK(op.kind == "Object Removal");
    }
    CHECK(multi);
    TestDataset again = generate_test_dataset("Object Removal", {st}, 25, 5, kb().catalog);
    for (size_t i = 0; i < ds.tasks.size(); ++i)
        CHECK(task_to_json(ds.tasks[i]).dump() == task_to_json(again.tasks[i]).dump());
    TestDataset one = generate_test_dataset("Object Removal", {st}, 1, 5, kb().catalog);
    CHECK(one.tasks.size() == 1);
}

TEST_CASE("net benefit accepts the ablation-derived measurement pair") {
    StubEvaluator stub;  // slow-only 46.8/0.93 vs candidate 29.5/0.91
    ContrastMiner miner;
    VerificationConfig cfg;
    RuleTable table = fixtures::seeded_rule_table();
    auto out = verify_proposal(simple_proposal("Object Removal"), table, stub,
                               tiny_datasets("Object Removal"), cfg, miner, true, kb().catalog);
    CHECK(out.accepted);
    CHECK(out.net_benefit == doctest::Approx(-34.82).epsilon(0.0003));
    CHECK(out.table.version == table.version + 1);
    CHECK(out.table.entries.size() == table.entries.size() + 1);
    CHECK(out.accepted_id == "SR17");
}

TEST_CASE("identical performance is rejected at the strict B < 0 boundary") {
    StubEvaluator stub;
    stub.baseline = {30.0, 0.9};
    stub.candidate = {30.0, 0.9};
    ContrastMiner miner;
    VerificationConfig cfg;
    RuleTable table = fixtures::seeded_rule_table();
    nlohmann::json before = rules_to_json(table);
    auto out = verify_proposal(simple_proposal("Object Removal"), table, stub,
                               tiny_datasets("Object Removal"), cfg, miner, false, kb().catalog);
    CHECK_FALSE(out.accepted);
    CHECK(out.net_benefit == doctest::Approx(0.0));
    // the table is bit-identical after a rejection
    CHECK(rules_to_json(out.table).dump() == before.dump());
    CHECK(rules_to_json(table).dump() == before.dump());
}

TEST_CASE("quality up two percent at flat cost is accepted") {
    TableAwareStub stub(0, {30.0, 0.90}, {30.0, 0.918});
    ContrastMiner miner;
    VerificationConfig cfg;
    RuleTable table;
    auto out = verify_proposal(simple_proposal("Object Removal"), table, stub,
                               tiny_datasets("Object Removal"), cfg, miner, false, kb().catalog);
    CHECK(out.accepted);
    CHECK(out.net_benefit == doctest::Approx(-2.0));
}

TEST_CASE("a quality drop that outweighs the saving is rejected after retries") {
    TableAwareStub stub(0, {30.0, 0.90}, {29.4, 0.81});  // dC% = -2, dQ% = -10 -> B = +8
    ContrastMiner miner;
    VerificationConfig cfg;
    RuleTable table;
    auto out = verify_proposal(simple_proposal("Object Removal"), table, stub,
                               tiny_datasets("Object Removal"), cfg, miner, false, kb().catalog);
    CHECK_FALSE(out.accepted);
    CHECK(out.net_benefit == doctest::Approx(8.0).epsilon(0.01));
    CHECK(out.table.entries.empty());
}

TEST_CASE("missing dataset and degenerate baseline raise their errors") {
    StubEvaluator stub;
    ContrastMiner miner;
    VerificationConfig cfg;
    RuleTable table;
    CHECK_THROWS_AS(verify_proposal(simple_proposal("Object Removal"), table, stub, {}, cfg, miner,
                                    false, kb().catalog),
                    MissingDataset);
    stub.baseline = {0.0, 0.9};
    stub.candidate = {0.0, 0.9};
    CHECK_THROWS_AS(verify_proposal(simple_proposal("Object Removal"), table, stub,
                                    tiny_datasets("Object Removal"), cfg, miner, false,
                                    kb().catalog),
                    DegenerateBaseline);
}

TEST_CASE("refinement cycle verifies sequentially and reports per proposal") {
    // a clearly beneficial rule: the simulator halves cost at equal quality
    // when the subroutine is used, so the first cycle accepts it
    LearningFixture fx = build_learning_fixture(11, kb(), 20);
    SimSystemEvaluator evaluator(kb(), fx.battery.environment, TradeoffAlpha(1.0), 0.8);
    ContrastMiner miner;
    VerificationConfig cfg;
    cfg.rng_seed = 11;

    TraceBuffer buffer;
    ExecutionConfig ecfg;
    RuleTable empty;
    for (size_t i = 0; i < fx.battery.tasks.size(); ++i) {
        ecfg.task_salt = i;
        auto [result, traces] =
            execute_task(fx.battery.tasks[i], empty, kb(), fx.battery.environment, ecfg);
        buffer.add_task(traces);
    }

    auto [table, report] =
        refinement_cycle(buffer, empty, evaluator, fx.datasets, cfg, miner, kb().catalog, 1);
    CHECK(report.cycle == 1);
    REQUIRE_FALSE(report.proposals.empty());
    long accepted = 0;
    for (const auto& row : report.proposals) {
        if (row.accepted) {
            ++accepted;
            CHECK(row.net_benefit < 0.0);
        }
    }
    CHECK(accepted >= 2);
    CHECK(table.version > empty.version);
    CHECK(static_cast<long>(table.entries.size()) == accepted);

    // a cycle with no traces proposes nothing and leaves the table alone
    TraceBuffer none;
    auto [same, empty_report] =
        refinement_cycle(none, table, evaluator, fx.datasets, cfg, miner, kb().catalog, 2);
    CHECK(empty_report.proposals.empty());
    CHECK(rules_to_json(same).dump() == rules_to_json(table).dump());
}
