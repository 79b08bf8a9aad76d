#include "toolpath/json_io.hpp"

#include <fstream>

namespace toolpath {

using nlohmann::json;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return doc;
}

void write_json_file(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << doc.dump(2) << "\n";
}

namespace {

void require_version(const json& doc, const char* what) {
    if (!doc.is_object() || !doc.contains("version"))
        throw ParseError(std::string(what) + ": missing schema version");
}

std::string family_name(SubtaskFamily f) {
    switch (f) {
        case SubtaskFamily::Object: return "object";
        case SubtaskFamily::Text: return "text";
        case SubtaskFamily::Neutral: return "neutral";
    }
    return "neutral";
}

SubtaskFamily family_from(const std::string& s) {
    if (s == "object") return SubtaskFamily::Object;
    if (s == "text") return SubtaskFamily::Text;
    if (s == "neutral") return SubtaskFamily::Neutral;
    throw ParseError("unknown subtask family: " + s);
}

using Effect = FeatureCatalog::SubtaskDef::Effect;

std::string effect_name(Effect e) {
    switch (e) {
        case Effect::None: return "none";
        case Effect::DeleteSource: return "delete_source";
        case Effect::RenameSource: return "rename_source";
        case Effect::UpdateSource: return "update_source";
    }
    return "none";
}

Effect effect_from(const std::string& s) {
    if (s == "none") return Effect::None;
    if (s == "delete_source") return Effect::DeleteSource;
    if (s == "rename_source") return Effect::RenameSource;
    if (s == "update_source") return Effect::UpdateSource;
    throw ParseError("unknown subtask effect: " + s);
}

ContextFeatures features_from_json(const json& j) {
    ContextFeatures c;
    for (auto it = j.begin(); it != j.end(); ++it)
        c.values[it.key()] = it.value().get<std::string>();
    return c;
}

json features_to(const ContextFeatures& c) {
    json j = json::object();
    for (const auto& [k, v] : c.values) j[k] = v;
    return j;
}

ActivationRule parse_rule_json(const json& j) {
    ActivationRule r;
    for (const auto& p : j.value("predicates", json::array())) {
        ActivationRule::Predicate pred;
        pred.feature = p.at("feature").get<std::string>();
        pred.op = rule_op_from_string(p.at("op").get<std::string>());
        for (const auto& v : p.at("operands")) pred.operands.push_back(v.get<std::string>());
        r.predicates.push_back(std::move(pred));
    }
    return r;
}

json rule_to_json(const ActivationRule& r) {
    json preds = json::array();
    for (const auto& p : r.predicates)
        preds.push_back({{"feature", p.feature}, {"op", to_string(p.op)}, {"operands", p.operands}});
    return {{"predicates", preds}};
}

}  // namespace

FeatureCatalog parse_features(const json& doc) {
    require_version(doc, "features.json");
    FeatureCatalog c;
    for (auto it = doc.at("features").begin(); it != doc.at("features").end(); ++it) {
        std::vector<std::string> domain;
        for (const auto& v : it.value()) domain.push_back(v.get<std::string>());
        c.feature_domains[it.key()] = std::move(domain);
    }
    for (const auto& s : doc.at("subtasks")) {
        FeatureCatalog::SubtaskDef def;
        def.name = s.at("name").get<std::string>();
        def.family = family_from(s.at("family").get<std::string>());
        def.effect = effect_from(s.value("effect", "none"));
        def.requires_target = s.value("requires_target", false);
        c.subtasks.push_back(std::move(def));
    }
    return c;
}

json features_to_json(const FeatureCatalog& c) {
    json features = json::object();
    for (const auto& [name, domain] : c.feature_domains) features[name] = domain;
    json subtasks = json::array();
    for (const auto& s : c.subtasks)
        subtasks.push_back({{"name", s.name},
                            {"family", family_name(s.family)},
                            {"effect", effect_name(s.effect)},
                            {"requires_target", s.requires_target}});
    return {{"version", kSchemaVersion}, {"features", features}, {"subtasks", subtasks}};
}

ToolDependencyGraph parse_tdg(const json& doc) {
    require_version(doc, "tdg.json");
    ToolDependencyGraph g;
    for (const auto& n : doc.at("nodes")) g.nodes.insert(n.get<std::string>());
    for (const auto& e : doc.at("edges")) {
        ToolDependencyGraph::Edge edge;
        edge.from = e.at("from").get<std::string>();
        edge.to = e.at("to").get<std::string>();
        for (const auto& f : e.value("families", json::array()))
            edge.families.insert(family_from(f.get<std::string>()));
        g.edges.push_back(std::move(edge));
    }
    return g;
}

json tdg_to_json(const ToolDependencyGraph& g) {
    json nodes = json::array();
    for (const auto& n : g.nodes) nodes.push_back(n);
    json edges = json::array();
    for (const auto& e : g.edges) {
        json je = {{"from", e.from}, {"to", e.to}};
        if (!e.families.empty()) {
            json fams = json::array();
            for (auto f : e.families) fams.push_back(family_name(f));
            je["families"] = fams;
        }
        edges.push_back(je);
    }
    return {{"version", kSchemaVersion}, {"nodes", nodes}, {"edges", edges}};
}

ModelDescriptionTable parse_mdt(const json& doc) {
    require_version(doc, "mdt.json");
    ModelDescriptionTable t;
    for (const auto& e : doc.at("tools")) {
        ModelDescriptionTable::Entry entry;
        for (const auto& s : e.at("supported_subtasks"))
            entry.supported_subtasks.insert(s.get<std::string>());
        for (const auto& s : e.value("inputs", json::array()))
            entry.inputs.insert(s.get<std::string>());
        for (const auto& s : e.value("outputs", json::array()))
            entry.outputs.insert(s.get<std::string>());
        t.entries[e.at("tool").get<std::string>()] = std::move(entry);
    }
    return t;
}

json mdt_to_json(const ModelDescriptionTable& t) {
    json tools = json::array();
    for (const auto& [tool, e] : t.entries) {
        tools.push_back({{"tool", tool},
                         {"supported_subtasks", e.supported_subtasks},
                         {"inputs", e.inputs},
                         {"outputs", e.outputs}});
    }
    return {{"version", kSchemaVersion}, {"tools", tools}};
}

BenchmarkTable parse_bt(const json& doc) {
    require_version(doc, "bt.json");
    BenchmarkTable t;
    for (const auto& e : doc.at("entries")) {
        BenchmarkTable::Entry entry{e.at("cost").get<double>(), e.at("quality").get<double>()};
        t.entries[{e.at("tool").get<std::string>(), e.at("subtask").get<std::string>()}] = entry;
    }
    return t;
}

json bt_to_json(const BenchmarkTable& t) {
    json entries = json::array();
    for (const auto& [key, e] : t.entries)
        entries.push_back({{"tool", key.first},
                           {"subtask", key.second},
                           {"cost", e.bench_cost},
                           {"quality", e.bench_quality}});
    return {{"version", kSchemaVersion}, {"entries", entries}};
}

KnowledgeBase load_knowledge(const json& features_doc, const json& tdg_doc, const json& mdt_doc,
                             const json& bt_doc) {
    return validate_knowledge(parse_features(features_doc), parse_tdg(tdg_doc), parse_mdt(mdt_doc),
                              parse_bt(bt_doc));
}

KnowledgeBase load_knowledge_files(const std::string& features_path, const std::string& tdg_path,
                                   const std::string& mdt_path, const std::string& bt_path) {
    return load_knowledge(load_json_file(features_path), load_json_file(tdg_path),
                          load_json_file(mdt_path), load_json_file(bt_path));
}

RuleTable parse_rules(const json& doc, const FeatureCatalog& catalog) {
    require_version(doc, "rules.json");
    RuleTable t;
    t.version = doc.value("table_version", 1);
    for (const auto& e : doc.at("rules")) {
        RuleEntry entry;
        entry.subroutine.id = e.at("id").get<std::string>();
        entry.subroutine.subtask_kind = e.at("subtask").get<std::string>();
        for (const auto& tool : e.at("tools")) entry.subroutine.tools.push_back(tool.get<std::string>());
        entry.rule = parse_rule_json(e.at("rule"));
        entry.avg_cost = e.at("avg_cost").get<double>();
        entry.avg_quality = e.at("avg_quality").get<double>();
        entry.usage_count = e.value("usage_count", 0L);
        entry.note = e.value("note", "");
        t.entries.push_back(std::move(entry));
    }
    t.validate(catalog);
    return t;
}

json rules_to_json(const RuleTable& t) {
    json rules = json::array();
    for (const auto& e : t.entries)
        rules.push_back({{"id", e.subroutine.id},
                         {"subtask", e.subroutine.subtask_kind},
                         {"tools", e.subroutine.tools},
                         {"rule", rule_to_json(e.rule)},
                         {"avg_cost", e.avg_cost},
                         {"avg_quality", e.avg_quality},
                         {"usage_count", e.usage_count},
                         {"note", e.note}});
    return {{"version", kSchemaVersion}, {"table_version", t.version}, {"rules", rules}};
}

SimEnvironment parse_sim(const json& doc, const FeatureCatalog& catalog) {
    require_version(doc, "sim.json");
    SimEnvironment env;
    env.rng_seed = doc.value("seed", 0ULL);
    for (const auto& p : doc.at("profiles")) {
        SimToolProfile profile;
        profile.tool = p.at("tool").get<std::string>();
        profile.subtask_kind = p.at("subtask").get<std::string>();
        profile.base_cost = p.at("base_cost").get<double>();
        profile.base_quality = p.at("base_quality").get<double>();
        profile.noise_sigma = p.value("noise_sigma", 0.0);
        for (const auto& d : p.value("degradations", json::array())) {
            SimToolProfile::Degradation deg;
            deg.condition = parse_rule_json(d.at("condition"));
            deg.condition.validate(catalog);
            deg.quality_override = d.at("quality_override").get<double>();
            deg.cost_multiplier = d.value("cost_multiplier", 1.0);
            profile.degradations.push_back(std::move(deg));
        }
        env.profiles[{profile.tool, profile.subtask_kind}] = std::move(profile);
    }
    return env;
}

json sim_to_json(const SimEnvironment& env) {
    json profiles = json::array();
    for (const auto& [key, p] : env.profiles) {
        json deg = json::array();
        for (const auto& d : p.degradations)
            deg.push_back({{"condition", rule_to_json(d.condition)},
                           {"quality_override", d.quality_override},
                           {"cost_multiplier", d.cost_multiplier}});
        profiles.push_back({{"tool", p.tool},
                            {"subtask", p.subtask_kind},
                            {"base_cost", p.base_cost},
                            {"base_quality", p.base_quality},
                            {"noise_sigma", p.noise_sigma},
                            {"degradations", deg}});
    }
    return {{"version", kSchemaVersion}, {"seed", env.rng_seed}, {"profiles", profiles}};
}

WorldState parse_world_state(const json& doc) {
    WorldState s;
    for (const auto& o : doc.value("objects", json::array()))
        s.objects.push_back(
            {o.at("name").get<std::string>(), features_from_json(o.value("features", json::object()))});
    return s;
}

json world_state_to_json(const WorldState& s) {
    json objects = json::array();
    for (const auto& o : s.objects)
        objects.push_back({{"name", o.name}, {"features", features_to(o.features)}});
    json edits = json::array();
    for (const auto& [tool, subtask] : s.edit_log)
        edits.push_back({{"tool", tool}, {"subtask", subtask.label()}});
    return {{"objects", objects}, {"edit_log", edits}};
}

TaskSpec parse_task(const json& doc, const FeatureCatalog& catalog) {
    require_version(doc, "task.json");
    TaskSpec spec;
    spec.prompt = doc.value("prompt", "");
    for (const auto& op : doc.at("ops")) {
        SubtaskInstance inst;
        inst.kind = op.at("kind").get<std::string>();
        if (!catalog.has_subtask(inst.kind)) throw ParseError("unknown subtask kind: " + inst.kind);
        inst.source_object = op.value("source_object", "");
        inst.target_object = op.value("target_object", "");
        if (op.contains("target_features"))
            inst.target_features = op.at("target_features").get<std::map<std::string, std::string>>();
        spec.structured_ops.push_back(std::move(inst));
    }
    if (spec.structured_ops.empty()) throw ParseError("task.json: ops must be non-empty");
    spec.initial_state = parse_world_state(doc.value("state", json::object()));
    for (const auto& o : spec.initial_state.objects) o.features.validate(catalog);
    return spec;
}

json task_to_json(const TaskSpec& spec) {
    json ops = json::array();
    for (const auto& op : spec.structured_ops) {
        json jop = {{"kind", op.kind},
                    {"source_object", op.source_object},
                    {"target_object", op.target_object}};
        if (!op.target_features.empty()) jop["target_features"] = op.target_features;
        ops.push_back(jop);
    }
    return {{"version", kSchemaVersion},
            {"prompt", spec.prompt},
            {"ops", ops},
            {"state", world_state_to_json(spec.initial_state)}};
}

json chain_to_json(const SubtaskChain& chain, const std::string& prompt) {
    json entries = json::array();
    for (size_t i = 0; i < chain.entries.size(); ++i) {
        json parent = json::array();
        if (i > 0) parent.push_back(chain.entries[i - 1].label());
        entries.push_back({{"subtask", chain.entries[i].label()}, {"parent", parent}});
    }
    return {{"task", prompt}, {"subtask_chain", entries}};
}

json fast_plan_to_json(const FastPlan& plan) {
    json assignments = json::array();
    for (const auto& a : plan.assignments)
        assignments.push_back({{"subtask", a.subtask.label()},
                               {"subroutine", a.selected ? json(a.selected->id) : json(nullptr)}});
    return {{"fast_plan", assignments}};
}

json task_result_to_json(const TaskResult& result) {
    json subtasks = json::array();
    for (const auto& sr : result.subtasks) {
        std::string reason = "none";
        if (sr.fallback_reason == FallbackReason::NoSubroutine) reason = "no_subroutine";
        if (sr.fallback_reason == FallbackReason::VlmFailure) reason = "vlm_failure";
        subtasks.push_back({{"subtask", sr.subtask.label()},
                            {"kind", sr.subtask.kind},
                            {"mode", sr.fast ? "fast" : "slow"},
                            {"fallback_reason", reason},
                            {"completed", sr.completed},
                            {"cost", sr.cost},
                            {"quality", sr.quality},
                            {"path", sr.path}});
    }
    return {{"subtasks", subtasks},
            {"total_cost", result.total_cost},
            {"mean_quality", result.mean_quality},
            {"failed", result.failed},
            {"final_state", world_state_to_json(result.final_state)}};
}

json trace_to_json(const ExecutionTrace& trace) {
    json failures = json::array();
    for (const auto& f : trace.failures)
        failures.push_back({{"tool", f.tool}, {"context", features_to(f.context_at_failure)}});
    return {{"subtask", trace.subtask_kind},
            {"final_path", trace.final_path},
            {"context", features_to(trace.context)},
            {"path_cost", trace.path_cost},
            {"path_quality", trace.path_quality},
            {"failures", failures},
            {"status", trace.success ? "success" : "fail"}};
}

json task_result_to_json(const TaskResult& result, const std::vector<ExecutionTrace>& traces) {
    json doc = task_result_to_json(result);
    json jt = json::array();
    for (const auto& t : traces) jt.push_back(trace_to_json(t));
    doc["traces"] = jt;
    return doc;
}

std::string trace_to_jsonl(const ExecutionTrace& trace) { return trace_to_json(trace).dump(); }

ExecutionTrace parse_trace_line(const std::string& line, const FeatureCatalog& catalog) {
    json j = json::parse(line);
    ExecutionTrace t;
    t.subtask_kind = j.at("subtask").get<std::string>();
    for (const auto& tool : j.at("final_path")) t.final_path.push_back(tool.get<std::string>());
    t.context = features_from_json(j.at("context"));
    t.context.validate(catalog);
    t.path_cost = j.at("path_cost").get<double>();
    t.path_quality = j.at("path_quality").get<double>();
    for (const auto& f : j.at("failures"))
        t.failures.push_back(
            {f.at("tool").get<std::string>(), features_from_json(f.at("context"))});
    t.success = j.at("status").get<std::string>() == "success";
    return t;
}

json cycle_report_to_json(const CycleReport& report) {
    json proposals = json::array();
    for (const auto& p : report.proposals)
        proposals.push_back({{"id", p.id},
                             {"kind", to_string(p.kind)},
                             {"B", p.net_benefit},
                             {"accepted", p.accepted},
                             {"retries", p.retries}});
    return {{"cycle", report.cycle}, {"proposals", proposals}};
}

}  // namespace toolpath
