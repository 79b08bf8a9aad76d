#include <algorithm>

#include "toolpath/batch.hpp"
#include "toolpath/fixtures.hpp"
#include "toolpath/rng.hpp"
#include "toolpath/sim.hpp"

namespace toolpath {

namespace {

using Op = ActivationRule::Op;

ActivationRule one_pred(const std::string& feature, Op op, std::vector<std::string> operands) {
    ActivationRule r;
    r.predicates.push_back({feature, op, std::move(operands)});
    return r;
}

// Context archetypes for the reference battery. Each archetype names the
// subtask kind it feeds and produces a feature map from a seeded stream;
// the mix is what gives the fast planner its edge and the slow planner its
// failure-driven exploration.
struct Archetype {
    SubtaskType kind;
    int weight = 0;  // draws per 100
    ContextFeatures (*features)(const SeedSequence&);
};

template <size_t N>
std::string pick(const SeedSequence& seq, std::uint64_t salt, const char* const (&options)[N]) {
    return options[seq.below(N, salt)];
}

ContextFeatures removal_simple(const SeedSequence& s) {
    static const char* sizes[] = {"small", "medium", "large"};
    static const char* bgs[] = {"Simple_Texture", "Homogenous_Area", "Repeating_Pattern"};
    return {{{"object_size", pick(s, 11, sizes)},
             {"background_content_type", pick(s, 12, bgs)},
             {"background_reconstruction_need", "Filling_Inpainting"},
             {"yolo_class_support", "supported"}}};
}

ContextFeatures removal_simple_unsupported(const SeedSequence& s) {
    ContextFeatures c = removal_simple(s);
    c.values["yolo_class_support"] = "unsupported";
    return c;
}

ContextFeatures removal_complex(const SeedSequence& s) {
    static const char* sizes[] = {"medium", "large", "huge"};
    static const char* bgs[] = {"Complex_Scene", "Occludes_Specific_Objects"};
    return {{{"object_size", pick(s, 13, sizes)},
             {"background_content_type", pick(s, 14, bgs)},
             {"background_reconstruction_need", "Drawing_Semantic_Completion"},
             {"yolo_class_support", "supported"}}};
}

ContextFeatures recolor_clean(const SeedSequence& s) {
    static const char* sizes[] = {"medium", "large"};
    static const char* transitions[] = {"mild", "moderate"};
    return {{{"object_size", pick(s, 15, sizes)},
             {"color_transition", pick(s, 16, transitions)},
             {"overlapping_critical_elements", "none"},
             {"yolo_class_support", "supported"}}};
}

ContextFeatures recolor_tiny(const SeedSequence& s) {
    ContextFeatures c = recolor_clean(s);
    c.values["object_size"] = "tiny";
    return c;
}

ContextFeatures recolor_extreme(const SeedSequence& s) {
    ContextFeatures c = recolor_clean(s);
    c.values["color_transition"] = "extreme_luminance";
    return c;
}

ContextFeatures replace_easy(const SeedSequence& s) {
    static const char* sizes[] = {"medium", "large"};
    static const char* counts[] = {"one", "two"};
    return {{{"object_size", pick(s, 17, sizes)},
             {"size_difference", "moderate"},
             {"shape_difference", "moderate"},
             {"instance_count", pick(s, 18, counts)},
             {"object_clarity", "high"},
             {"yolo_class_support", "supported"}}};
}

ContextFeatures replace_tiny(const SeedSequence& s) {
    ContextFeatures c = replace_easy(s);
    c.values["object_size"] = "tiny";
    return c;
}

ContextFeatures replace_shapelarge(const SeedSequence& s) {
    ContextFeatures c = replace_easy(s);
    c.values["shape_difference"] = "large";
    return c;
}

ContextFeatures text_uniform(const SeedSequence&) {
    return {{{"background_content_behind_text", "Uniform_Solid_Color"},
             {"background_reconstruction_need", "None"},
             {"background_artifact_tolerance", "low"},
             {"surrounding_context_similarity", "high"}}};
}

ContextFeatures text_plain(const SeedSequence& s) {
    static const char* bgs[] = {"Plain_Color", "Simple_Gradient", "Simple_Texture"};
    return {{{"background_content_behind_text", pick(s, 19, bgs)},
             {"background_reconstruction_need", "Filling_Inpainting"},
             {"background_artifact_tolerance", "low"},
             {"surrounding_context_similarity", "high"}}};
}

ContextFeatures text_tolerant(const SeedSequence&) {
    return {{{"background_content_behind_text", "Complex_Image"},
             {"background_reconstruction_need", "Drawing_Semantic_Completion"},
             {"background_artifact_tolerance", "high"},
             {"surrounding_context_similarity", "low"}}};
}

ContextFeatures detection_ctx(const SeedSequence&) {
    return {{{"yolo_class_support", "supported"}}};
}

const Archetype kBattery[] = {
    {"Object Removal", 17, removal_simple},
    {"Object Removal", 11, removal_complex},
    {"Object Removal", 3, removal_simple_unsupported},
    {"Object Recoloration", 11, recolor_clean},
    {"Object Recoloration", 6, recolor_tiny},
    {"Object Recoloration", 8, recolor_extreme},
    {"Object Replacement", 9, replace_easy},
    {"Object Replacement", 5, replace_tiny},
    {"Object Replacement", 5, replace_shapelarge},
    {"Text Removal", 7, text_uniform},
    {"Text Removal", 5, text_plain},
    {"Text Removal", 4, text_tolerant},
    {"Object Detection", 9, detection_ctx},
};

const char* kObjectNouns[] = {"car",   "bench", "cat",  "dog",    "sign",  "ball",
                              "chair", "lamp",  "bird", "bottle", "plant", "board"};

}  // namespace

Battery build_reference_battery(std::uint64_t seed, const KnowledgeBase& kb) {
    Battery battery;
    battery.environment = fixtures::reference_environment(seed);

    int total_weight = 0;
    for (const auto& a : kBattery) total_weight += a.weight;

    SeedSequence root = SeedSequence(seed).with("reference-battery");
    const int n_tasks = 120;
    for (int t = 0; t < n_tasks; ++t) {
        SeedSequence ts = root.with(static_cast<std::uint64_t>(t));
        TaskSpec spec;
        spec.prompt = "battery task " + std::to_string(t);

        // 1-8 ops; cycle through the counts so the histogram covers the range
        int ops = 1 + static_cast<int>((static_cast<std::uint64_t>(t) + ts.below(8, 1)) % 8);
        bool chained_pair = (t % 7 == 3) && ops >= 2;  // replacement feeding a recoloration

        for (int k = 0; k < ops; ++k) {
            SeedSequence os = ts.with(static_cast<std::uint64_t>(k));
            int roll = static_cast<int>(os.below(static_cast<std::uint64_t>(total_weight), 2));
            const Archetype* chosen = &kBattery[0];
            for (const auto& a : kBattery) {
                if (roll < a.weight) {
                    chosen = &a;
                    break;
                }
                roll -= a.weight;
            }

            std::string name = std::string(kObjectNouns[os.below(std::size(kObjectNouns), 3)]) +
                               "_" + std::to_string(t) + "_" + std::to_string(k);
            ContextFeatures feats = chosen->features(os);

            SubtaskInstance op;
            op.kind = chosen->kind;
            op.source_object = name;
            if (kb.catalog.subtask(chosen->kind).requires_target) op.target_object = name + "_new";

            if (chained_pair && k == 0) {
                // replacement whose product is recolored by the next op
                op.kind = "Object Replacement";
                op.target_object = name + "_new";
                feats = replace_easy(os);
                op.target_features = recolor_clean(os.with("post")).values;
            } else if (chained_pair && k == 1) {
                op.kind = "Object Recoloration";
                const auto& prev = spec.structured_ops.front();
                op.source_object = prev.target_object;  // created by the replacement
                op.target_object = op.source_object + "_tinted";
                spec.structured_ops.push_back(std::move(op));
                continue;  // no initial-state object: features arrive via the rename
            }

            spec.initial_state.objects.push_back({name, feats});
            spec.structured_ops.push_back(std::move(op));
        }
        battery.tasks.push_back(std::move(spec));
    }
    return battery;
}

// ---------------------------------------------------------------------------
// Learning fixture: engineered single-feature failure conditions
// ---------------------------------------------------------------------------

std::string path_key(const std::vector<ToolId>& tools, const SubtaskType& subtask) {
    std::string s = subtask + "|";
    for (size_t i = 0; i < tools.size(); ++i) {
        if (i) s += ">";
        s += tools[i];
    }
    return s;
}

namespace {

SimEnvironment learning_environment(std::uint64_t seed) {
    SimEnvironment env;
    env.rng_seed = seed;
    env.profiles = fixtures::reference_environment(seed).profiles;
    for (auto& [key, p] : env.profiles) p.degradations.clear();

    constexpr double kFail = 0.30;
    env.profiles.at({"SD_Inpaint", "Object Recoloration"})
        .degradations.push_back(
            {one_pred("color_transition", Op::Equals, {"extreme_luminance"}), kFail, 1.0});
    env.profiles.at({"SD_SearchRecolor", "Object Recoloration"})
        .degradations.push_back({one_pred("object_size", Op::Equals, {"tiny"}), kFail, 1.0});
    env.profiles.at({"SD_Inpaint", "Object Removal"})
        .degradations.push_back(
            {one_pred("background_content_type", Op::Equals, {"Complex_Scene"}), kFail, 1.0});
    env.profiles.at({"SD_Erase", "Object Removal"})
        .degradations.push_back({one_pred("object_size", Op::Equals, {"huge"}), kFail, 1.0});
    return env;
}

ContextFeatures learn_recolor_ctx(const std::string& size, const std::string& transition) {
    return {{{"object_size", size},
             {"color_transition", transition},
             {"overlapping_critical_elements", "none"},
             {"yolo_class_support", "supported"}}};
}

ContextFeatures learn_removal_ctx(const std::string& size, const std::string& bg,
                                  const std::string& rec) {
    // reconstruction need rotates independently of the background so the
    // miner cannot mistake a correlated bucket for the failure trigger
    return {{{"object_size", size},
             {"background_content_type", bg},
             {"background_reconstruction_need", rec},
             {"yolo_class_support", "supported"}}};
}

// one window = refinement_interval single-subtask tasks with fixed quotas,
// seeded-shuffled; quotas keep every mined group supported and every
// engineered condition straddled by successes and failures in each window
std::vector<std::pair<SubtaskType, ContextFeatures>> learning_window() {
    std::vector<std::pair<SubtaskType, ContextFeatures>> w;
    const SubtaskType rec = "Object Recoloration";
    const SubtaskType rem = "Object Removal";
    // recoloration: 5 benign (sizes vary, tiny included), 3 extreme non-tiny, 1 double-adversarial
    w.push_back({rec, learn_recolor_ctx("tiny", "mild")});
    w.push_back({rec, learn_recolor_ctx("small", "moderate")});
    w.push_back({rec, learn_recolor_ctx("medium", "mild")});
    w.push_back({rec, learn_recolor_ctx("large", "moderate")});
    w.push_back({rec, learn_recolor_ctx("medium", "moderate")});
    w.push_back({rec, learn_recolor_ctx("small", "extreme_luminance")});
    w.push_back({rec, learn_recolor_ctx("medium", "extreme_luminance")});
    w.push_back({rec, learn_recolor_ctx("large", "extreme_luminance")});
    w.push_back({rec, learn_recolor_ctx("tiny", "extreme_luminance")});
    // removal: 6 benign (huge included), 4 Complex_Scene non-huge, 1 double-adversarial;
    // reconstruction need rotates through its domain on both sides
    w.push_back({rem, learn_removal_ctx("small", "Simple_Texture", "Filling_Inpainting")});
    w.push_back({rem, learn_removal_ctx("medium", "Homogenous_Area", "Drawing_Semantic_Completion")});
    w.push_back({rem, learn_removal_ctx("large", "Repeating_Pattern", "None")});
    w.push_back({rem, learn_removal_ctx("huge", "Simple_Texture", "Filling_Inpainting")});
    w.push_back({rem, learn_removal_ctx("medium", "Simple_Texture", "Drawing_Semantic_Completion")});
    w.push_back({rem, learn_removal_ctx("large", "Homogenous_Area", "None")});
    w.push_back({rem, learn_removal_ctx("small", "Complex_Scene", "Drawing_Semantic_Completion")});
    w.push_back({rem, learn_removal_ctx("medium", "Complex_Scene", "Filling_Inpainting")});
    w.push_back({rem, learn_removal_ctx("large", "Complex_Scene", "None")});
    w.push_back({rem, learn_removal_ctx("medium", "Complex_Scene", "Drawing_Semantic_Completion")});
    w.push_back({rem, learn_removal_ctx("huge", "Complex_Scene", "Filling_Inpainting")});
    return w;  // 20 subtasks
}

}  // namespace

LearningFixture build_learning_fixture(std::uint64_t seed, const KnowledgeBase& kb, long n_tasks) {
    LearningFixture fx;
    fx.battery.environment = learning_environment(seed);

    fx.ground_truth[path_key({"YOLO", "SAM", "SD_Inpaint"}, "Object Recoloration")] =
        one_pred("color_transition", Op::NotEquals, {"extreme_luminance"});
    fx.ground_truth[path_key({"SD_SearchRecolor"}, "Object Recoloration")] =
        one_pred("object_size", Op::NotEquals, {"tiny"});
    fx.ground_truth[path_key({"YOLO", "SAM", "SD_Inpaint"}, "Object Removal")] =
        one_pred("background_content_type", Op::NotEquals, {"Complex_Scene"});
    fx.ground_truth[path_key({"YOLO", "SAM", "SD_Erase"}, "Object Removal")] =
        one_pred("object_size", Op::NotEquals, {"huge"});

    SeedSequence root = SeedSequence(seed).with("learning-stream");
    auto window = learning_window();
    long produced = 0;
    for (long w = 0; produced < n_tasks; ++w) {
        // seeded shuffle of the window quota
        std::vector<size_t> order(window.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        SeedSequence ws = root.with(static_cast<std::uint64_t>(w));
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[ws.below(i, i)]);

        for (size_t i = 0; i < order.size() && produced < n_tasks; ++i, ++produced) {
            const auto& [kind, ctx] = window[order[i]];
            TaskSpec spec;
            spec.prompt = kind + " stream task " + std::to_string(produced);
            std::string name = std::string(kObjectNouns[ws.below(std::size(kObjectNouns),
                                                                 1000 + i)]) +
                               "_" + std::to_string(produced);
            spec.initial_state.objects.push_back({name, ctx});
            SubtaskInstance op;
            op.kind = kind;
            op.source_object = name;
            if (kb.catalog.subtask(kind).requires_target) op.target_object = name + "_new";
            spec.structured_ops.push_back(std::move(op));
            fx.battery.tasks.push_back(std::move(spec));
        }
    }

    // verification datasets reuse the window contexts as base states
    std::vector<WorldState> rec_states, rem_states;
    for (const auto& [kind, ctx] : window) {
        WorldState st;
        for (int i = 0; i < 7; ++i)
            st.objects.push_back({"obj" + std::to_string(i), ctx});
        if (kind == "Object Recoloration")
            rec_states.push_back(std::move(st));
        else
            rem_states.push_back(std::move(st));
    }
    fx.datasets["Object Recoloration"] = generate_test_dataset(
        "Object Recoloration", rec_states, 40, seed ^ 0xd5, kb.catalog);
    fx.datasets["Object Removal"] =
        generate_test_dataset("Object Removal", rem_states, 40, seed ^ 0xd6, kb.catalog);
    return fx;
}

}  // namespace toolpath
