#pragma once

#include <string>
#include <vector>

#include "toolpath/chain.hpp"
#include "toolpath/domain.hpp"
#include "toolpath/executor.hpp"
#include "toolpath/learning.hpp"
#include "toolpath/rules.hpp"
#include "toolpath/sim.hpp"
#include "toolpath/trace.hpp"

#include <json.hpp>

namespace toolpath {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All fixture documents embed a top-level "version" string.
inline constexpr const char* kSchemaVersion = "1";

nlohmann::json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& doc);

FeatureCatalog parse_features(const nlohmann::json& doc);
ToolDependencyGraph parse_tdg(const nlohmann::json& doc);
ModelDescriptionTable parse_mdt(const nlohmann::json& doc);
BenchmarkTable parse_bt(const nlohmann::json& doc);

nlohmann::json features_to_json(const FeatureCatalog& catalog);
nlohmann::json tdg_to_json(const ToolDependencyGraph& tdg);
nlohmann::json mdt_to_json(const ModelDescriptionTable& mdt);
nlohmann::json bt_to_json(const BenchmarkTable& bt);

// Parses and cross-validates the three knowledge structures.
KnowledgeBase load_knowledge(const nlohmann::json& features_doc, const nlohmann::json& tdg_doc,
                             const nlohmann::json& mdt_doc, const nlohmann::json& bt_doc);
KnowledgeBase load_knowledge_files(const std::string& features_path, const std::string& tdg_path,
                                   const std::string& mdt_path, const std::string& bt_path);

RuleTable parse_rules(const nlohmann::json& doc, const FeatureCatalog& catalog);
nlohmann::json rules_to_json(const RuleTable& table);

SimEnvironment parse_sim(const nlohmann::json& doc, const FeatureCatalog& catalog);
nlohmann::json sim_to_json(const SimEnvironment& env);

TaskSpec parse_task(const nlohmann::json& doc, const FeatureCatalog& catalog);
nlohmann::json task_to_json(const TaskSpec& spec);

nlohmann::json world_state_to_json(const WorldState& state);
WorldState parse_world_state(const nlohmann::json& doc);

// App-style chain document: entries carry a display label and their parent.
nlohmann::json chain_to_json(const SubtaskChain& chain, const std::string& prompt);

nlohmann::json fast_plan_to_json(const FastPlan& plan);
nlohmann::json task_result_to_json(const TaskResult& result);
// result document embedding the task's execution traces
nlohmann::json task_result_to_json(const TaskResult& result,
                                   const std::vector<ExecutionTrace>& traces);

nlohmann::json trace_to_json(const ExecutionTrace& trace);
// One trace per line (JSON-lines).
std::string trace_to_jsonl(const ExecutionTrace& trace);
ExecutionTrace parse_trace_line(const std::string& line, const FeatureCatalog& catalog);

nlohmann::json cycle_report_to_json(const CycleReport& report);

}  // namespace toolpath
