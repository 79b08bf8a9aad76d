#include <doctest.h>

#include "support/fixture_helpers.hpp"
#include "toolpath/fixtures.hpp"
#include "toolpath/json_io.hpp"
#include "toolpath/rng.hpp"
#include "toolpath/rules.hpp"

using namespace toolpath;
using toolpath::testing::ctx;

namespace {

const FeatureCatalog& catalog() {
    static FeatureCatalog c = fixtures::reference_catalog();
    return c;
}

const RuleTable& seeded() {
    static RuleTable t = fixtures::seeded_rule_table();
    return t;
}

SubtaskInstance inst(const std::string& kind, const std::string& src = "x",
                     const std::string& tgt = "") {
    SubtaskInstance s;
    s.kind = kind;
    s.source_object = src;
    s.target_object = tgt;
    return s;
}

// App-style worked contexts: a very large car on a busy background, and a
// wooden board with critical text that is being recolored
ContextFeatures big_car_ctx() {
    return ctx({{"object_size", "huge"},
                {"background_content_type", "Complex_Scene"},
                {"background_reconstruction_need", "Drawing_Semantic_Completion"},
                {"yolo_class_support", "supported"}});
}

ContextFeatures board_ctx(const std::string& transition) {
    return ctx({{"object_size", "large"},
                {"color_transition", transition},
                {"overlapping_critical_elements", "critical_text"},
                {"yolo_class_support", "unsupported"}});
}

}  // namespace

TEST_CASE("seeded rule table validates and round-trips through rules.json") {
    seeded().validate(catalog());
    nlohmann::json doc = rules_to_json(seeded());
    RuleTable again = parse_rules(doc, catalog());
    CHECK(rules_to_json(again).dump() == doc.dump());
    CHECK(again.entries.size() == 16);
}

TEST_CASE("rule satisfaction: direct, negated and vacuous predicates") {
    ActivationRule not_tiny;
    not_tiny.predicates = {{"object_size", ActivationRule::Op::NotEquals, {"tiny"}}};
    CHECK(rule_satisfied(not_tiny, ctx({{"object_size", "large"}})));
    CHECK_FALSE(rule_satisfied(not_tiny, ctx({{"object_size", "tiny"}})));

    // extreme luminance change defeats the direct recolor rule
    const RuleEntry* sr2 = seeded().find("SR2");
    REQUIRE(sr2 != nullptr);
    CHECK_FALSE(rule_satisfied(sr2->rule, ctx({{"color_transition", "extreme_luminance"}})));
    CHECK(rule_satisfied(sr2->rule, ctx({{"color_transition", "moderate"}})));

    ActivationRule vacuous;
    CHECK(rule_satisfied(vacuous, ContextFeatures{}));
}

TEST_CASE("a missing feature leaves the rule unsatisfied with a note") {
    ActivationRule not_tiny;
    not_tiny.predicates = {{"object_size", ActivationRule::Op::NotEquals, {"tiny"}}};
    std::string note;
    CHECK_FALSE(rule_satisfied(not_tiny, ContextFeatures{}, &note));
    CHECK(note == "missing feature: object_size");
}

TEST_CASE("fast-plan score reproduces the seeded-row arithmetic") {
    const RuleEntry* sr1 = seeded().find("SR1");
    const RuleEntry* sr2 = seeded().find("SR2");
    REQUIRE(sr1);
    REQUIRE(sr2);
    CHECK(fast_plan_score(*sr1, TradeoffAlpha(1.0)) == doctest::Approx(10.39 * 1.11).epsilon(1e-9));
    CHECK(fast_plan_score(*sr2, TradeoffAlpha(1.0)) == doctest::Approx(12.92 * 1.05).epsilon(1e-9));
    CHECK(fast_plan_score(*sr1, TradeoffAlpha(1.0)) < fast_plan_score(*sr2, TradeoffAlpha(1.0)));
    // alpha = 0 ignores cost entirely
    CHECK(fast_plan_score(*sr2, TradeoffAlpha(0.0)) == doctest::Approx(1.05 * 1.05).epsilon(1e-9));
}

TEST_CASE("selection picks SR10 for the big-car removal and SR2 for the board recolor") {
    auto removal = select_subroutine(inst("Object Removal", "car"), big_car_ctx(), seeded(),
                                     TradeoffAlpha(1.0));
    REQUIRE(removal.has_value());
    CHECK(removal->id == "SR10");

    auto recolor = select_subroutine(inst("Object Recoloration", "board", "pink board"),
                                     board_ctx("moderate"), seeded(), TradeoffAlpha(1.0));
    REQUIRE(recolor.has_value());
    CHECK(recolor->id == "SR2");

    // black -> white board: the color difference is too much for SR2 as well
    auto none = select_subroutine(inst("Object Recoloration", "board", "white board"),
                                  board_ctx("extreme_luminance"), seeded(), TradeoffAlpha(1.0));
    CHECK_FALSE(none.has_value());
}

TEST_CASE("selection over an empty table is always None") {
    RuleTable empty;
    CHECK_FALSE(select_subroutine(inst("Object Removal", "car"), big_car_ctx(), empty,
                                  TradeoffAlpha(1.0))
                    .has_value());
}

TEST_CASE("selection soundness: a selected entry's rule is satisfied (random contexts)") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        SeedSequence s(seed);
        ContextFeatures c;
        for (const auto& [feature, domain] : catalog().feature_domains)
            if (s.unit(hash_str(0, feature)) < 0.7)
                c.values[feature] = domain[s.below(domain.size(), hash_str(1, feature))];
        for (const auto& kind :
             {"Object Removal", "Object Recoloration", "Object Replacement", "Text Removal"}) {
            auto sel = select_subroutine(inst(kind), c, seeded(), TradeoffAlpha(1.0));
            if (!sel) continue;
            const RuleEntry* e = seeded().find(sel->id);
            REQUIRE(e != nullptr);
            CHECK(rule_satisfied(e->rule, c));
            CHECK(e->subroutine.subtask_kind == kind);
        }
    }
}

TEST_CASE("argmin is invariant under cost rescaling") {
    RuleTable scaled = seeded();
    for (auto& e : scaled.entries) e.avg_cost *= 11.3;
    for (double alpha : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        for (const auto& c : {big_car_ctx(), board_ctx("moderate"), board_ctx("mild")}) {
            auto a = select_subroutine(inst("Object Removal"), c, seeded(), TradeoffAlpha(alpha));
            auto b = select_subroutine(inst("Object Removal"), c, scaled, TradeoffAlpha(alpha));
            CHECK(a.has_value() == b.has_value());
            if (a) CHECK(a->id == b->id);
        }
    }
}

TEST_CASE("fast plan over the worked three-entry chain is [SR10, SR2, None]") {
    WorldState state;
    state.objects.push_back({"car", big_car_ctx()});
    state.objects.push_back({"board", board_ctx("moderate")});

    SubtaskChain chain;
    chain.entries = {inst("Object Removal", "car"), inst("Object Recoloration", "board", "pink"),
                     inst("Text Detection", "")};
    for (size_t i = 0; i < chain.entries.size(); ++i)
        chain.entries[i].ordinal = static_cast<int>(i) + 1;

    FastPlan plan = build_fast_plan(chain, state, seeded(), TradeoffAlpha(1.0), catalog());
    REQUIRE(plan.assignments.size() == 3);
    REQUIRE(plan.assignments[0].selected.has_value());
    CHECK(plan.assignments[0].selected->id == "SR10");
    REQUIRE(plan.assignments[1].selected.has_value());
    CHECK(plan.assignments[1].selected->id == "SR2");
    CHECK_FALSE(plan.assignments[2].selected.has_value());
}

TEST_CASE("fast plan over an empty table is all None") {
    WorldState state;
    state.objects.push_back({"car", big_car_ctx()});
    SubtaskChain chain;
    chain.entries = {inst("Object Removal", "car")};
    RuleTable empty;
    FastPlan plan = build_fast_plan(chain, state, empty, TradeoffAlpha(1.0), catalog());
    CHECK_FALSE(plan.assignments[0].selected.has_value());
}

TEST_CASE("later selections see features rewritten by an earlier replacement") {
    // the replacement turns a tiny object into a large one; the recolor rule
    // needs the updated size to fire
    WorldState state;
    state.objects.push_back({"cat", ctx({{"object_size", "tiny"},
                                         {"size_difference", "moderate"},
                                         {"shape_difference", "moderate"},
                                         {"instance_count", "one"},
                                         {"object_clarity", "high"},
                                         {"yolo_class_support", "supported"}})});

    SubtaskInstance replace = inst("Object Replacement", "cat", "dog");
    replace.ordinal = 1;
    replace.target_features = {{"object_size", "large"},
                               {"color_transition", "moderate"},
                               {"overlapping_critical_elements", "none"},
                               {"yolo_class_support", "supported"}};
    SubtaskInstance recolor = inst("Object Recoloration", "dog", "pink dog");
    recolor.ordinal = 2;

    SubtaskChain chain;
    chain.entries = {replace, recolor};

    FastPlan live = build_fast_plan(chain, state, seeded(), TradeoffAlpha(1.0), catalog());
    REQUIRE(live.assignments[1].selected.has_value());
    CHECK(live.assignments[1].selected->id == "SR1");  // fires on the rewritten features

    // snapshot planning reads the initial state, where "dog" does not exist
    FastPlan snap = build_fast_plan(chain, state, seeded(), TradeoffAlpha(1.0), catalog(), true);
    CHECK_FALSE(snap.assignments[1].selected.has_value());
}

TEST_CASE("determinism: identical inputs give identical fast plans") {
    WorldState state;
    state.objects.push_back({"car", big_car_ctx()});
    state.objects.push_back({"board", board_ctx("mild")});
    SubtaskChain chain;
    chain.entries = {inst("Object Removal", "car"),
                     inst("Object Recoloration", "board", "pink")};
    for (size_t i = 0; i < chain.entries.size(); ++i)
        chain.entries[i].ordinal = static_cast<int>(i) + 1;
    FastPlan a = build_fast_plan(chain, state, seeded(), TradeoffAlpha(0.5), catalog());
    FastPlan b = build_fast_plan(chain, state, seeded(), TradeoffAlpha(0.5), catalog());
    REQUIRE(a.assignments.size() == b.assignments.size());
    for (size_t i = 0; i < a.assignments.size(); ++i) {
        CHECK(a.assignments[i].selected.has_value() == b.assignments[i].selected.has_value());
        if (a.assignments[i].selected)
            CHECK(a.assignments[i].selected->id == b.assignments[i].selected->id);
    }
}

TEST_CASE("running-mean stats update") {
    RuleTable t = seeded();
    RuleEntry* e = t.find("SR1");
    REQUIRE(e);
    e->avg_cost = 10.0;
    e->avg_quality = 0.9;
    e->usage_count = 1;
    update_entry_stats(t, "SR1", 14.0, 0.8);
    CHECK(e->avg_cost == doctest::Approx(12.0));
    CHECK(e->avg_quality == doctest::Approx(0.85));
    CHECK(e->usage_count == 2);

    e->usage_count = 0;
    update_entry_stats(t, "SR1", 7.0, 0.7);
    CHECK(e->avg_cost == doctest::Approx(7.0));
    CHECK(e->avg_quality == doctest::Approx(0.7));
    CHECK(e->usage_count == 1);

    CHECK_THROWS_AS(update_entry_stats(t, "SR99", 1.0, 1.0), UnknownEntry);
}

TEST_CASE("next_id continues the numbered sequence") {
    CHECK(seeded().next_id() == "SR17");
    RuleTable empty;
    CHECK(empty.next_id() == "SR1");
}
