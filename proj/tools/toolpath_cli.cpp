#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "toolpath/batch.hpp"
#include "toolpath/json_io.hpp"

namespace fs = std::filesystem;
using namespace toolpath;

namespace {

struct GlobalOpts {
    std::string data_dir = "data";
    std::string features, tdg, mdt, bt, rules, sim;
    double alpha = 1.0;
    std::string mode = "adaptive";
    double q_thresh = 0.8;
    std::uint64_t seed = 0;
    std::string out = "out";
};

RunManifest make_manifest(const GlobalOpts& g) {
    RunManifest m;
    auto resolve = [&](const std::string& override_path, const char* name) {
        return override_path.empty() ? (fs::path(g.data_dir) / name).string() : override_path;
    };
    m.features_path = resolve(g.features, "features.json");
    m.tdg_path = resolve(g.tdg, "tdg.json");
    m.mdt_path = resolve(g.mdt, "mdt.json");
    m.bt_path = resolve(g.bt, "bt.json");
    m.rules_path = resolve(g.rules, "rules.json");
    m.sim_path = resolve(g.sim, "sim.json");
    m.alpha = TradeoffAlpha(g.alpha);
    m.mode = exec_mode_from_string(g.mode);
    m.q_thresh = g.q_thresh;
    m.seed = g.seed;
    m.out_dir = g.out;
    m.load();
    return m;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    out << text;
}

// a battery is either the seeded reference battery or a directory of
// NNN-task.json files run against the manifest's simulator
std::vector<TaskSpec> load_battery(const std::string& spec, const RunManifest& m,
                                   SimEnvironment& env) {
    if (spec == "reference") {
        Battery b = build_reference_battery(m.seed, m.kb);
        env = std::move(b.environment);
        return std::move(b.tasks);
    }
    env = m.sim;
    std::vector<TaskSpec> tasks;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(spec))
        if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) tasks.push_back(parse_task(load_json_file(f.string()), m.kb.catalog));
    if (tasks.empty()) throw ValidationError("battery directory holds no task files: " + spec);
    return tasks;
}

void dump_battery(const std::vector<TaskSpec>& tasks, const fs::path& dir) {
    fs::create_directories(dir);
    for (size_t i = 0; i < tasks.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "%03zu-task.json", i);
        write_json_file((dir / name).string(), task_to_json(tasks[i]));
    }
}

int cmd_plan(const GlobalOpts& g, const std::string& task_path) {
    RunManifest m = make_manifest(g);
    TaskSpec spec = parse_task(load_json_file(task_path), m.kb.catalog);
    SubtaskChain chain = propose_chain_structured(spec, m.kb.catalog);
    FastPlan plan = build_fast_plan(chain, spec.initial_state, m.rules, m.alpha, m.kb.catalog);
    nlohmann::json out = chain_to_json(chain, spec.prompt);
    out.update(fast_plan_to_json(plan));
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_run(const GlobalOpts& g, const std::string& battery_spec, const std::string& dump_dir,
            const std::string& trace_out, const std::string& search_log) {
    RunManifest m = make_manifest(g);
    SimEnvironment env;
    std::vector<TaskSpec> tasks = load_battery(battery_spec, m, env);
    if (!dump_dir.empty()) dump_battery(tasks, dump_dir);

    ExecutionConfig cfg;
    cfg.alpha = m.alpha;
    cfg.mode = m.mode;
    cfg.q_thresh = m.q_thresh;
    cfg.keep_search_log = !search_log.empty();
    BatteryRunResult run = run_battery(tasks, m.rules, m.kb, env, cfg);

    if (!search_log.empty()) {
        std::ofstream sl(search_log);
        for (size_t t = 0; t < run.results.size(); ++t)
            for (const auto& sr : run.results[t].subtasks)
                for (const auto& rec : sr.search_log) {
                    nlohmann::json j = {{"task", t},          {"subtask", sr.subtask.label()},
                                        {"node", rec.node},   {"g", rec.g},
                                        {"h", rec.h},         {"f", rec.f},
                                        {"action", rec.action}};
                    sl << j.dump() << "\n";
                }
    }

    fs::create_directories(m.out_dir);
    for (size_t i = 0; i < run.results.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "%03zu-result.json", i);
        write_json_file((fs::path(m.out_dir) / name).string(),
                        task_result_to_json(run.results[i], run.traces[i]));
    }
    write_text(fs::path(m.out_dir) / "aggregate.csv", battery_csv(run));

    if (!trace_out.empty()) {
        std::ofstream tr(trace_out);
        for (const auto& per_task : run.traces)
            for (const auto& t : per_task) tr << trace_to_jsonl(t) << "\n";
    }

    bool any_failed = false;
    for (const auto& r : run.results) any_failed |= r.failed;
    std::cout << "tasks: " << run.results.size() << "  mean_cost: " << run.mean_cost
              << "  mean_quality: " << run.mean_quality << "\n";
    return any_failed && m.mode == ExecMode::FastOnly ? 0 : (any_failed ? 2 : 0);
}

int cmd_sweep(const GlobalOpts& g, const std::string& battery_spec,
              const std::string& alphas_csv) {
    RunManifest m = make_manifest(g);
    SimEnvironment env;
    std::vector<TaskSpec> tasks = load_battery(battery_spec, m, env);

    std::vector<double> alphas;
    std::stringstream ss(alphas_csv);
    for (std::string item; std::getline(ss, item, ',');) alphas.push_back(std::stod(item));
    for (double a : alphas)
        if (a < 0.0 || a > 2.0) throw ValidationError("alpha outside [0, 2] in sweep");

    auto rows = sweep_alpha(tasks, m.rules, m.kb, env, m.mode, m.q_thresh, alphas);
    fs::create_directories(m.out_dir);
    std::string name = "pareto-" + to_string(m.mode) + ".csv";
    write_text(fs::path(m.out_dir) / name, sweep_csv(rows));
    std::cout << sweep_csv(rows);
    return 0;
}

int cmd_learn(const GlobalOpts& g, long n_tasks, long interval) {
    RunManifest m = make_manifest(g);
    if (n_tasks < interval) throw ValidationError("stream shorter than one refinement interval");

    LearningFixture fx = build_learning_fixture(m.seed, m.kb, n_tasks);
    VerificationConfig vcfg;
    vcfg.refinement_interval = interval;
    vcfg.rng_seed = m.seed;

    RuleTable empty;  // learning starts from a cold table
    ExecutionConfig cfg;
    cfg.alpha = m.alpha;
    cfg.q_thresh = m.q_thresh;
    ContrastMiner miner(vcfg.min_support);
    LearnRun run = run_learning_stream(fx.battery.tasks, empty, m.kb, fx.battery.environment, cfg,
                                       vcfg, miner, fx.datasets);

    fs::create_directories(m.out_dir);
    write_text(fs::path(m.out_dir) / "learning_curve.csv", learn_csv(run));
    write_json_file((fs::path(m.out_dir) / "rules-learned.json").string(),
                    rules_to_json(run.final_rules));
    nlohmann::json cycles = nlohmann::json::array();
    for (const auto& c : run.cycles) cycles.push_back(cycle_report_to_json(c));
    write_json_file((fs::path(m.out_dir) / "cycles.json").string(), cycles);
    std::cout << learn_csv(run);
    return 0;
}

int cmd_stats(const std::string& results_dir) {
    std::vector<TaskResult> results;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(results_dir))
        if (e.path().filename().string().find("-result.json") != std::string::npos)
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        nlohmann::json j = load_json_file(f.string());
        TaskResult r;
        for (const auto& s : j.at("subtasks")) {
            SubtaskResult sr;
            sr.subtask.kind = s.at("kind").get<std::string>();
            sr.fast = s.at("mode").get<std::string>() == "fast";
            std::string reason = s.at("fallback_reason").get<std::string>();
            sr.fallback_reason = reason == "vlm_failure"
                                     ? FallbackReason::VlmFailure
                                     : (reason == "no_subroutine" ? FallbackReason::NoSubroutine
                                                                  : FallbackReason::None);
            r.subtasks.push_back(std::move(sr));
        }
        results.push_back(std::move(r));
    }
    FallbackStatistics st = fallback_statistics(results);
    nlohmann::json by_kind = nlohmann::json::object();
    for (const auto& [kind, pct] : st.by_subtask_kind) by_kind[kind] = pct;
    nlohmann::json out = {{"total_subtasks", st.total_subtasks},
                          {"fast_pct", st.fast_pct},
                          {"slow_pct", st.slow_pct},
                          {"vlm_failure_pct", st.vlm_failure_pct},
                          {"no_subroutine_pct", st.no_subroutine_pct},
                          {"by_subtask_kind", by_kind}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cost-sensitive toolpath planner over simulated tool profiles"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--data", g.data_dir, "directory holding the knowledge fixtures");
    app.add_option("--features", g.features, "features.json override");
    app.add_option("--tdg", g.tdg, "tdg.json override");
    app.add_option("--mdt", g.mdt, "mdt.json override");
    app.add_option("--bt", g.bt, "bt.json override");
    app.add_option("--rules", g.rules, "rules.json override");
    app.add_option("--sim", g.sim, "sim.json override");
    app.add_option("--alpha", g.alpha, "cost/quality trade-off in [0,2]");
    app.add_option("--mode", g.mode, "adaptive|fast|slow");
    app.add_option("--q-thresh", g.q_thresh, "quality gate threshold");
    app.add_option("--seed", g.seed, "rng seed");
    app.add_option("--out", g.out, "output directory");

    std::string task_path;
    auto* plan = app.add_subcommand("plan", "print the subtask chain and fast plan for a task");
    plan->add_option("--task", task_path, "task.json")->required();

    std::string battery_spec = "reference", dump_dir, trace_out, search_log;
    auto* run = app.add_subcommand("run", "execute a battery of tasks");
    run->add_option("--battery", battery_spec, "'reference' or a directory of task files");
    run->add_option("--task", task_path, "run a single task file instead of a battery");
    run->add_option("--dump-battery", dump_dir, "write the battery task files here");
    run->add_option("--trace-out", trace_out, "JSON-lines trace log");
    run->add_option("--search-log", search_log, "JSON-lines record per search expansion");

    std::string alphas_csv = "0,0.5,1,1.5,2";
    auto* sweep = app.add_subcommand("sweep-alpha", "mean cost/quality per alpha");
    sweep->add_option("--battery", battery_spec, "'reference' or a directory of task files");
    sweep->add_option("--alphas", alphas_csv, "comma-separated alphas");

    long n_tasks = 200, interval = 20;
    auto* learn = app.add_subcommand("learn", "online rule induction over a seeded stream");
    learn->add_option("--tasks", n_tasks, "stream length");
    learn->add_option("--interval", interval, "tasks per refinement cycle");

    std::string results_dir;
    auto* stats = app.add_subcommand("stats", "fallback statistics over run results");
    stats->add_option("--results", results_dir, "directory of *-result.json")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (plan->parsed()) return cmd_plan(g, task_path);
        if (run->parsed()) {
            if (!task_path.empty()) {
                // single-task battery via a temp spec list
                RunManifest m = make_manifest(g);
                TaskSpec spec = parse_task(load_json_file(task_path), m.kb.catalog);
                ExecutionConfig cfg;
                cfg.alpha = m.alpha;
                cfg.mode = m.mode;
                cfg.q_thresh = m.q_thresh;
                BatteryRunResult one = run_battery({spec}, m.rules, m.kb, m.sim, cfg);
                fs::create_directories(m.out_dir);
                write_json_file((fs::path(m.out_dir) / "000-result.json").string(),
                                task_result_to_json(one.results.front(), one.traces.front()));
                write_text(fs::path(m.out_dir) / "aggregate.csv", battery_csv(one));
                return one.results.front().failed ? 2 : 0;
            }
            return cmd_run(g, battery_spec, dump_dir, trace_out, search_log);
        }
        if (sweep->parsed()) return cmd_sweep(g, battery_spec, alphas_csv);
        if (learn->parsed()) return cmd_learn(g, n_tasks, interval);
        if (stats->parsed()) return cmd_stats(results_dir);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "execution failed: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
