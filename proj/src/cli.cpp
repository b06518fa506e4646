#include "rankbench/cli.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rankbench/benchmark_io.hpp"
#include "rankbench/chat_client.hpp"
#include "rankbench/errors.hpp"
#include "rankbench/histogram.hpp"
#include "rankbench/manifest.hpp"
#include "rankbench/metrics.hpp"
#include "rankbench/prompts.hpp"
#include "rankbench/rank_builder.hpp"
#include "rankbench/sandbox.hpp"
#include "rankbench/saturation.hpp"
#include "rankbench/solution_gen.hpp"
#include "rankbench/sweep.hpp"
#include "rankbench/verifier_eval.hpp"

namespace rankbench {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Whole lines only, so parallel stages never interleave mid-line.
class Log {
public:
    Log(std::ostream& err, bool quiet) : err_(err), quiet_(quiet) {}
    void info(const std::string& msg) {
        if (quiet_) return;
        std::lock_guard lock(mu_);
        err_ << msg << '\n' << std::flush;
    }
    void warn(const std::string& msg) {
        std::lock_guard lock(mu_);
        err_ << "warning: " << msg << '\n' << std::flush;
    }

private:
    std::mutex mu_;
    std::ostream& err_;
    bool quiet_;
};

using Applier = std::function<void(json&)>;

// Flag values land in the config only when given, so file values survive.
struct Binder {
    CLI::App* app;
    std::vector<Applier>* appliers;

    template <typename T>
    CLI::Option* opt(const std::string& name, T& storage, const std::string& ptr, const std::string& desc) {
        auto* o = app->add_option(name, storage, desc);
        appliers->push_back([o, &storage, ptr](json& cfg) {
            if (o->count() > 0) cfg[json::json_pointer(ptr)] = storage;
        });
        return o;
    }

    CLI::Option* flag(const std::string& name, const std::string& ptr, bool value_when_set, const std::string& desc) {
        auto* o = app->add_flag(name, desc);
        appliers->push_back([o, ptr, value_when_set](json& cfg) {
            if (o->count() > 0) cfg[json::json_pointer(ptr)] = value_when_set;
        });
        return o;
    }
};

int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp<unsigned>(hw == 0 ? 1 : hw, 1, 8));
}

const json& section(const json& cfg, const char* name) {
    static const json kEmpty = json::object();
    auto it = cfg.find(name);
    if (it == cfg.end()) return kEmpty;
    if (!it->is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
    return *it;
}

std::string required_path(const json& cfg, const char* key, const char* flag) {
    auto it = cfg.find(key);
    if (it == cfg.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw ConfigError(std::string("missing ") + flag);
    }
    return it->get<std::string>();
}

// ---------------------------------------------------------------------------
// Config resolution. Each resolver reads its section with defaults and
// writes the fully resolved section back for the manifest.

ExecConfig resolve_exec(json& cfg) {
    const json& s = section(cfg, "exec");
    ExecConfig e;
    e.timeout_ms = s.value("timeout_ms", e.timeout_ms);
    e.slack_ms = s.value("slack_ms", e.slack_ms);
    e.runtime_command = s.value("runtime", e.runtime_command);
    e.record_timings = s.value("record_timings", e.record_timings);
    e.max_workers = s.value("max_workers", cfg.at("workers").get<int>());
    const std::string shim = s.value("shim", std::string());
    e.shim_path = shim.empty() ? default_shim_path() : fs::path(shim);
    validate(e);
    cfg["exec"] = {{"timeout_ms", e.timeout_ms},           {"slack_ms", e.slack_ms},
                   {"runtime", e.runtime_command},         {"record_timings", e.record_timings},
                   {"max_workers", e.max_workers},         {"shim", e.shim_path.string()}};
    return e;
}

json retry_to_json(const RetryPolicy& p) {
    return {{"max_retries", p.max_retries},
            {"initial_backoff_ms", p.initial_backoff.count()},
            {"backoff_multiplier", p.backoff_multiplier},
            {"max_backoff_ms", p.max_backoff.count()}};
}

PromptTemplate resolve_prompt(const json& p) {
    if (p.is_string()) return prompts::builtin(p.get<std::string>());
    if (!p.is_object()) throw ConfigError("prompt entries must be a builtin name or an object");
    const std::string name = p.value("name", std::string());
    if (auto it = p.find("file"); it != p.end()) return load_template(it->get<std::string>(), name);
    if (auto it = p.find("body"); it != p.end()) return PromptTemplate{name.empty() ? "custom" : name, it->get<std::string>()};
    throw ConfigError("prompt object needs 'file' or 'body'");
}

GenerationConfig resolve_generation(json& cfg) {
    const json& s = section(cfg, "generation");
    const long long seed = cfg.at("seed").get<long long>();
    GenerationConfig g;
    g.temperature = s.value("temperature", g.temperature);
    g.top_p = s.value("top_p", g.top_p);
    g.rounds = s.value("rounds", g.rounds);
    g.seeds = s.contains("seeds") ? s.at("seeds").get<std::vector<long long>>()
                                  : std::vector<long long>{seed + 1, seed + 2, seed + 3};
    if (auto it = s.find("prompts"); it != s.end()) {
        g.prompts.clear();
        for (const auto& p : *it) g.prompts.push_back(resolve_prompt(p));
    }
    g.language = s.value("language", g.language);
    g.max_in_flight = s.value("max_in_flight", cfg.at("workers").get<int>());
    if (auto it = s.find("max_tokens"); it != s.end() && !it->is_null()) g.max_tokens = it->get<int>();
    if (auto it = s.find("retry"); it != s.end()) g.retry = retry_policy_from_json(*it);
    validate(g);
    json prompts = json::array();
    for (const auto& p : g.prompts) prompts.push_back({{"name", p.name}, {"body", p.body}});
    cfg["generation"] = {{"temperature", g.temperature}, {"top_p", g.top_p},
                         {"rounds", g.rounds},           {"seeds", g.seeds},
                         {"prompts", prompts},           {"language", g.language},
                         {"max_in_flight", g.max_in_flight},
                         {"max_tokens", g.max_tokens ? json(*g.max_tokens) : json(nullptr)},
                         {"retry", retry_to_json(g.retry)}};
    return g;
}

SelectionParams resolve_selection(json& cfg) {
    const json& s = section(cfg, "selection");
    SelectionParams p;
    p.k = s.value("k", p.k);
    p.max_rounds = s.value("max_rounds", p.max_rounds);
    p.include_canonical = s.value("include_canonical", p.include_canonical);
    const std::string deficit = s.value("on_deficit", std::string("keep_partial"));
    if (deficit == "drop") {
        p.on_deficit = DeficitPolicy::drop;
    } else if (deficit == "keep_partial") {
        p.on_deficit = DeficitPolicy::keep_partial;
    } else {
        throw ConfigError("on_deficit must be drop or keep_partial");
    }
    const std::string rule = s.value("target_rule", std::string("reconciled"));
    if (rule == "reconciled") {
        p.target_rule = TargetRule::reconciled;
    } else if (rule == "literal") {
        p.target_rule = TargetRule::literal;
    } else {
        throw ConfigError("target_rule must be reconciled or literal");
    }
    validate(p);
    cfg["selection"] = {{"k", p.k},
                        {"max_rounds", p.max_rounds},
                        {"include_canonical", p.include_canonical},
                        {"on_deficit", deficit},
                        {"target_rule", rule}};
    return p;
}

SuiteSource parse_suite_source(const std::string& s) {
    if (s == "generated") return SuiteSource::generated;
    if (s == "reference") return SuiteSource::reference;
    if (s == "file") return SuiteSource::file;
    throw ConfigError("suite_source must be generated, reference or file");
}

std::string to_string(SuiteSource s) {
    switch (s) {
        case SuiteSource::generated: return "generated";
        case SuiteSource::reference: return "reference";
        case SuiteSource::file: return "file";
    }
    return "generated";
}

VerifierConfig resolve_verifier(json& cfg) {
    const json& s = section(cfg, "verifier");
    const json name = s.contains("name") ? s.at("name") : json(nullptr);
    VerifierConfig v;
    v.kind = parse_verifier_kind(s.value("kind", std::string("generated_tests")));
    v.suite_source = parse_suite_source(s.value("suite_source", std::string("generated")));
    v.test_count = s.value("test_count", v.test_count);
    v.with_solution = s.value("with_solution", v.with_solution);
    v.temperature = s.value("temperature", v.temperature);
    v.top_p = s.value("top_p", v.top_p);
    v.seed = s.contains("seed") ? s.at("seed").get<long long>() : cfg.at("seed").get<long long>();
    if (auto it = s.find("max_tokens"); it != s.end() && !it->is_null()) v.max_tokens = it->get<int>();
    if (auto it = s.find("retry"); it != s.end()) v.retry = retry_policy_from_json(*it);
    v.max_in_flight = s.value("max_in_flight", cfg.at("workers").get<int>());
    const json& r = s.contains("reward") ? s.at("reward") : json::object();
    v.reward.attribute = r.value("attribute", v.reward.attribute);
    if (auto it = r.find("user_template"); it != r.end()) v.reward.user = resolve_prompt(*it);
    if (auto it = r.find("assistant_template"); it != r.end()) v.reward.assistant = resolve_prompt(*it);
    v.reward.retry = v.retry;
    v.reward.max_in_flight = v.max_in_flight;
    if (v.test_count < 1) throw ConfigError("test_count must be >= 1");
    if (v.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    cfg["verifier"] = {{"kind", to_string(v.kind)},
                       {"suite_source", to_string(v.suite_source)},
                       {"test_count", v.test_count},
                       {"with_solution", v.with_solution},
                       {"temperature", v.temperature},
                       {"top_p", v.top_p},
                       {"seed", *v.seed},
                       {"max_tokens", v.max_tokens ? json(*v.max_tokens) : json(nullptr)},
                       {"retry", retry_to_json(v.retry)},
                       {"max_in_flight", v.max_in_flight},
                       {"reward",
                        {{"attribute", v.reward.attribute},
                         {"user_template", {{"name", v.reward.user.name}, {"body", v.reward.user.body}}},
                         {"assistant_template",
                          {{"name", v.reward.assistant.name}, {"body", v.reward.assistant.body}}}}}};
    if (!name.is_null()) cfg["verifier"]["name"] = name;
    return v;
}

MaeMode resolve_mae_mode(json& cfg) {
    const std::string m = section(cfg, "metrics").value("mae_mode", std::string("per_problem"));
    cfg["metrics"] = {{"mae_mode", m}};
    if (m == "per_problem") return MaeMode::per_problem;
    if (m == "pooled") return MaeMode::pooled;
    throw ConfigError("mae_mode must be per_problem or pooled");
}

std::vector<std::unique_ptr<ChatClient>> make_clients(const json& cfg) {
    std::vector<std::unique_ptr<ChatClient>> out;
    if (auto it = cfg.find("clients"); it != cfg.end()) {
        for (const auto& c : *it) out.push_back(make_client(c));
    } else if (auto it2 = cfg.find("client"); it2 != cfg.end()) {
        out.push_back(make_client(*it2));
    }
    if (out.empty()) throw ConfigError("no chat client configured (use --client-script or a 'client' config entry)");
    return out;
}

std::vector<json> to_rows(const auto& items, auto&& fn) {
    std::vector<json> rows;
    for (const auto& x : items) rows.push_back(fn(x));
    return rows;
}

struct RunContext {
    json cfg;
    fs::path out_dir;
    Log* log;
    std::ostream* out;
    std::vector<std::string> outputs;

    fs::path output(const std::string& name) {
        outputs.push_back(name);
        return out_dir / name;
    }
};

// ---------------------------------------------------------------------------

void cmd_transform(RunContext& rc) {
    json& cfg = rc.cfg;
    const std::string input = required_path(cfg, "input", "--input");
    const auto schema = parse_schema(cfg.value("schema", std::string("generic")));
    const auto exec = resolve_exec(cfg);
    const auto gen = resolve_generation(cfg);
    const auto sel = resolve_selection(cfg);

    const auto problems = load_benchmark(input, schema);
    if (problems.empty()) throw ValidationError("input benchmark is empty");
    rc.log->info("transform: " + std::to_string(problems.size()) + " problems from " + input);

    auto clients = make_clients(cfg);
    Sandbox sandbox(exec);
    TransformContext ctx;
    for (auto& c : clients) ctx.clients.push_back(c.get());
    ctx.generation = gen;
    ctx.sandbox = &sandbox;
    ctx.selection = sel;
    std::vector<json> records;
    ctx.on_record = [&](const GenerationRecord& r) { records.push_back(record_to_json(r)); };

    const auto result = transform_benchmark(problems, ctx);
    for (const auto& d : result.deficits) {
        rc.log->warn("deficit on " + d.task_id + ": " + d.reason + (d.kept_partial ? " (kept partial)" : " (dropped)"));
    }

    write_ranked_benchmark(result.entries, rc.output("ranked.jsonl"));
    write_jsonl(rc.output("deficits.jsonl"), to_rows(result.deficits, deficit_to_json));
    write_jsonl(rc.output("generations.jsonl"), records);
    json stats = {{"source", stats_to_json(compute_stats(problems, std::span<const std::vector<double>>{}))}};
    stats["ranked"] = result.entries.empty() ? json(nullptr) : stats_to_json(compute_stats(result.entries));
    stats["deficits"] = result.deficits.size();
    write_text(rc.output("stats.json"), stats.dump(2) + "\n");
    *rc.out << "ranked " << result.entries.size() << " of " << problems.size() << " problems; "
            << result.deficits.size() << " deficits\n";
}

struct VerifierSetup {
    VerifierConfig cfg;
    std::vector<std::unique_ptr<ChatClient>> clients;
    std::unique_ptr<Sandbox> sandbox;
    VerifierResources resources;
    std::string name;
};

VerifierSetup setup_verifier(json& cfg) {
    VerifierSetup v;
    v.cfg = resolve_verifier(cfg);
    const bool needs_client = v.cfg.kind == VerifierKind::reward_model || v.cfg.suite_source == SuiteSource::generated;
    if (needs_client) {
        v.clients = make_clients(cfg);
        v.resources.client = v.clients.front().get();
    }
    if (v.cfg.kind == VerifierKind::generated_tests) {
        v.sandbox = std::make_unique<Sandbox>(resolve_exec(cfg));
        v.resources.sandbox = v.sandbox.get();
    }
    if (v.cfg.kind == VerifierKind::generated_tests && v.cfg.suite_source == SuiteSource::reference) {
        const auto problems = load_benchmark(required_path(cfg, "source", "--source"),
                                             parse_schema(cfg.value("schema", std::string("generic"))));
        v.cfg.suites = reference_suites(problems);
    } else if (v.cfg.kind == VerifierKind::generated_tests && v.cfg.suite_source == SuiteSource::file) {
        for (const auto& row : read_jsonl(required_path(cfg, "suite_file", "--suite-file"))) {
            auto s = suite_from_json(row);
            const std::string id = s.task_id;
            v.cfg.suites[id] = std::move(s);
        }
    }
    const json& vs = cfg.at("verifier");
    if (vs.contains("name")) {
        v.name = vs.at("name").get<std::string>();
    } else if (v.cfg.kind == VerifierKind::reward_model || v.cfg.suite_source == SuiteSource::generated) {
        v.name = v.resources.client->describe();
    } else {
        v.name = to_string(v.cfg.suite_source) + " suite";
    }
    return v;
}

void cmd_evaluate(RunContext& rc) {
    json& cfg = rc.cfg;
    const auto benchmark = load_ranked_benchmark(required_path(cfg, "input", "--input"));
    if (benchmark.empty()) throw ValidationError("ranked benchmark is empty");
    const auto mae_mode = resolve_mae_mode(cfg);
    auto v = setup_verifier(cfg);
    rc.log->info("evaluate: " + std::to_string(benchmark.size()) + " entries with " + v.name);

    const auto result = evaluate_verifier(benchmark, v.cfg, v.resources);
    for (const auto& f : result.failures) rc.log->warn(f.task_id + ": " + f.reason);

    write_jsonl(rc.output("suites.jsonl"), to_rows(result.suites, suite_to_json));
    write_jsonl(rc.output("estimates.jsonl"), to_rows(result.estimates, estimate_to_json));
    write_jsonl(rc.output("failures.jsonl"),
                to_rows(result.failures, [](const VerifierFailure& f) { return json{{"task_id", f.task_id}, {"reason", f.reason}}; }));
    std::vector<json> per_problem;
    for (const auto& e : result.estimates) {
        if (e.complete()) per_problem.push_back(problem_metrics_to_json(problem_metrics(e)));
    }
    write_jsonl(rc.output("problem_metrics.jsonl"), per_problem);

    auto report = aggregate(result.estimates, mae_mode);
    // Problems with no estimate at all are excluded just like incomplete ones.
    report.n_excluded = benchmark.size() - report.n_problems;
    json rj = report_to_json(report);
    rj["name"] = v.name;
    write_text(rc.output("report.json"), rj.dump(2) + "\n");
    const std::vector<std::pair<std::string, MetricsReport>> rows{{v.name, report}};
    const std::string table = format_table(rows);
    write_text(rc.output("report.txt"), table);
    *rc.out << table;
}

void cmd_sweep(RunContext& rc) {
    json& cfg = rc.cfg;
    const auto benchmark = load_ranked_benchmark(required_path(cfg, "input", "--input"));
    if (benchmark.empty()) throw ValidationError("ranked benchmark is empty");
    const auto mae_mode = resolve_mae_mode(cfg);
    std::vector<int> counts{5, 10, 15, 20, 25};
    if (const auto ptr = "/sweep/counts"_json_pointer; cfg.contains(ptr)) counts = cfg.at(ptr).get<std::vector<int>>();
    if (counts.empty()) throw ConfigError("sweep needs at least one count");
    cfg["sweep"] = {{"counts", counts}};
    auto v = setup_verifier(cfg);

    const auto points = scaling_sweep(benchmark, v.cfg, v.resources, counts, mae_mode);
    std::vector<std::pair<std::string, MetricsReport>> rows;
    for (const auto& p : points) {
        if (!p.error.empty()) rc.log->warn("count " + std::to_string(p.count) + ": " + p.error);
        if (p.report) rows.emplace_back(std::to_string(p.count) + " tests", *p.report);
    }
    write_text(rc.output("sweep.csv"), sweep_csv(points));
    write_text(rc.output("sweep.json"), json(to_rows(points, sweep_point_to_json)).dump(2) + "\n");
    const std::string table = format_table(rows);
    write_text(rc.output("report.txt"), table);
    *rc.out << table;
    if (rows.empty()) throw std::runtime_error("every sweep count failed");
}

void cmd_saturate(RunContext& rc) {
    json& cfg = rc.cfg;
    const json& s = section(cfg, "saturation");
    SaturationParams params;
    params.k_max = s.value("k_max", 0);
    params.reps = s.value("reps", params.reps);
    params.interval = parse_interval_method(s.value("interval", std::string("percentile")));
    params.seed = static_cast<std::uint64_t>(cfg.at("seed").get<long long>());
    params.workers = static_cast<std::size_t>(cfg.at("workers").get<int>());
    if (params.reps < 1) throw ConfigError("reps must be >= 1");
    if (params.k_max < 0) throw ConfigError("k_max must be >= 0");
    cfg["saturation"] = {{"k_max", params.k_max},
                         {"reps", params.reps},
                         {"interval", params.interval == IntervalMethod::mean ? "mean" : "percentile"}};

    std::vector<OutcomeMatrix> matrices;
    if (cfg.contains("matrices")) {
        for (const auto& row : read_jsonl(cfg.at("matrices").get<std::string>())) matrices.push_back(matrix_from_json(row));
    } else {
        const auto benchmark = load_ranked_benchmark(required_path(cfg, "input", "--input"));
        const auto problems = load_benchmark(required_path(cfg, "source", "--source"),
                                             parse_schema(cfg.value("schema", std::string("generic"))));
        std::map<std::string, const Problem*> by_id;
        for (const auto& p : problems) by_id[p.task_id] = &p;
        Sandbox sandbox(resolve_exec(cfg));
        for (const auto& e : benchmark) {
            auto it = by_id.find(e.task_id);
            if (it == by_id.end() || it->second->predefined_tests.empty()) {
                rc.log->warn(e.task_id + ": no tests in source benchmark, skipped");
                continue;
            }
            matrices.push_back(build_outcome_matrix(e, it->second->predefined_tests, sandbox));
        }
    }
    write_jsonl(rc.output("outcome_matrices.jsonl"), to_rows(matrices, matrix_to_json));
    rc.log->info("saturate: " + std::to_string(matrices.size()) + " problems, " + std::to_string(params.reps) + " reps");

    const auto rows = saturation_analysis(matrices, params);
    for (const auto& r : rows) {
        if (r.clamped_problems > 0) {
            rc.log->warn("k=" + std::to_string(r.k) + ": " + std::to_string(r.clamped_problems) +
                         " problems have fewer tests and were sampled in full");
        }
    }
    const std::string csv = saturation_csv(rows);
    write_text(rc.output("saturation.csv"), csv);
    write_text(rc.output("saturation.json"), json(to_rows(rows, saturation_row_to_json)).dump(2) + "\n");
    *rc.out << csv;
}

void cmd_analyze(RunContext& rc) {
    json& cfg = rc.cfg;
    const auto benchmark = load_ranked_benchmark(required_path(cfg, "input", "--input"));
    if (benchmark.empty()) throw ValidationError("ranked benchmark is empty");
    std::vector<VerifierEstimate> estimates;
    if (cfg.contains("estimates")) {
        for (const auto& row : read_jsonl(cfg.at("estimates").get<std::string>())) estimates.push_back(estimate_from_json(row));
    }
    const std::vector<HistogramData> hists{solutions_per_problem(benchmark), score_distribution(benchmark),
                                           score_range(benchmark), testgen_error_distribution(estimates)};
    for (const auto& h : hists) {
        write_text(rc.output("hist_" + h.name + ".json"), histogram_to_json(h).dump(2) + "\n");
        write_text(rc.output("hist_" + h.name + ".csv"), histogram_csv(h));
        *rc.out << h.name << ": total " << h.total() << '\n';
    }
    write_text(rc.output("stats.json"), stats_to_json(compute_stats(benchmark)).dump(2) + "\n");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Build ranked code-solution benchmarks and score synthetic verifiers against them", "rankbench"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", tool_version());

    std::string config_path;
    std::string out_dir;
    long long seed = 0;
    int workers = 0;
    bool quiet = false;
    std::vector<Applier> appliers;
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    auto* seed_opt = app.add_option("--seed", seed, "Base seed for generation, test generation and sampling");
    auto* workers_opt = app.add_option("--workers", workers, "Parallel executions and in-flight requests")
                            ->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "Output run directory");
    app.add_flag("--quiet", quiet, "Only print warnings and results");

    // Option storage shared across subcommands; only one subcommand runs.
    std::string input, schema, source, suite_file, matrices, estimates, client_script, shim, runtime;
    std::string verifier_kind, suite_source, mae_mode, on_deficit, target_rule, interval, name;
    int k = 0, max_rounds = 0, tests = 0, timeout_ms = 0, reps = 0, k_max = 0, rounds = 0;
    std::vector<int> counts;

    auto add_exec = [&](Binder& b) {
        b.opt("--timeout-ms", timeout_ms, "/exec/timeout_ms", "Per-test timeout")->check(CLI::PositiveNumber);
        b.opt("--shim", shim, "/exec/shim", "Runner shim script");
        b.opt("--runtime", runtime, "/exec/runtime", "Interpreter used to run the shim");
        b.flag("--no-timings", "/exec/record_timings", false, "Drop measured times for reproducible output");
    };
    auto add_verifier = [&](Binder& b) {
        b.opt("--input", input, "/input", "Ranked benchmark JSONL");
        b.opt("--verifier", verifier_kind, "/verifier/kind", "generated_tests | reward_model");
        b.opt("--suite-source", suite_source, "/verifier/suite_source", "generated | reference | file");
        b.opt("--source", source, "/source", "Source benchmark (reference suites)");
        b.opt("--schema", schema, "/schema", "Source schema: humaneval | mbpp | generic");
        b.opt("--suite-file", suite_file, "/suite_file", "Suites JSONL (suite source 'file')");
        b.flag("--with-solution", "/verifier/with_solution", true, "Show each solution when generating its tests");
        b.opt("--client-script", client_script, "/client", "Scripted mock client JSON");
        b.opt("--mae-mode", mae_mode, "/metrics/mae_mode", "per_problem | pooled");
        b.opt("--name", name, "/verifier/name", "Row label in the report table");
        add_exec(b);
    };

    auto* transform = app.add_subcommand("transform", "Turn a benchmark with tests into a ranked benchmark");
    auto* evaluate = app.add_subcommand("evaluate", "Score a verifier against a ranked benchmark");
    auto* sweep = app.add_subcommand("sweep", "Evaluate a test-generating verifier at several suite sizes");
    auto* saturate = app.add_subcommand("saturate", "Spearman of subsampled test sets against the full set");
    auto* analyze = app.add_subcommand("analyze", "Emit histogram data for a ranked benchmark");

    std::map<CLI::App*, std::vector<Applier>> sub_appliers;
    {
        Binder b{transform, &sub_appliers[transform]};
        b.opt("--input", input, "/input", "Source benchmark JSONL");
        b.opt("--schema", schema, "/schema", "humaneval | mbpp | generic");
        b.opt("--k", k, "/selection/k", "Solutions per problem")->check(CLI::Range(2, 1000));
        b.opt("--max-rounds", max_rounds, "/selection/max_rounds", "Generation iterations")->check(CLI::PositiveNumber);
        b.opt("--rounds", rounds, "/generation/rounds", "Prompt cycles per iteration")->check(CLI::PositiveNumber);
        b.opt("--on-deficit", on_deficit, "/selection/on_deficit", "keep_partial | drop");
        b.opt("--target-rule", target_rule, "/selection/target_rule", "reconciled | literal");
        b.opt("--client-script", client_script, "/client", "Scripted mock client JSON");
        add_exec(b);
    }
    {
        Binder b{evaluate, &sub_appliers[evaluate]};
        add_verifier(b);
        b.opt("--tests", tests, "/verifier/test_count", "Tests requested per problem")->check(CLI::PositiveNumber);
    }
    {
        Binder b{sweep, &sub_appliers[sweep]};
        add_verifier(b);
        b.opt("--counts", counts, "/sweep/counts", "Comma-separated test counts")->delimiter(',');
    }
    {
        Binder b{saturate, &sub_appliers[saturate]};
        b.opt("--input", input, "/input", "Ranked benchmark JSONL");
        b.opt("--source", source, "/source", "Source benchmark holding the tests");
        b.opt("--schema", schema, "/schema", "humaneval | mbpp | generic");
        b.opt("--matrices", matrices, "/matrices", "Reuse outcome_matrices.jsonl instead of executing");
        b.opt("--k-max", k_max, "/saturation/k_max", "Largest subsample size (0: all)");
        b.opt("--reps", reps, "/saturation/reps", "Repetitions per k")->check(CLI::PositiveNumber);
        b.opt("--interval", interval, "/saturation/interval", "percentile | mean");
        add_exec(b);
    }
    {
        Binder b{analyze, &sub_appliers[analyze]};
        b.opt("--input", input, "/input", "Ranked benchmark JSONL");
        b.opt("--estimates", estimates, "/estimates", "estimates.jsonl from evaluate");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    Log log(err, quiet);
    CLI::App* sub = app.get_subcommands().front();
    const auto started = std::chrono::system_clock::now();
    RunContext rc;
    rc.log = &log;
    rc.out = &out;
    try {
        json cfg = json::object();
        if (!config_path.empty()) {
            cfg = json::parse(read_text(config_path), nullptr, false);
            if (cfg.is_discarded() || !cfg.is_object()) throw ConfigError("config '" + config_path + "' is not a JSON object");
        }
        for (auto& apply : sub_appliers[sub]) apply(cfg);
        // A scripted client given on the command line replaces any configured one.
        if (cfg.contains("client") && cfg["client"].is_string()) {
            cfg["client"] = {{"kind", "script"}, {"path", cfg["client"].get<std::string>()}};
            cfg.erase("clients");
        }
        if (seed_opt->count() > 0 || !cfg.contains("seed")) cfg["seed"] = seed;
        if (workers_opt->count() > 0) {
            cfg["workers"] = workers;
        } else if (!cfg.contains("workers")) {
            cfg["workers"] = default_workers();
        }
        if (!out_dir.empty()) cfg["out"] = out_dir;
        rc.out_dir = required_path(cfg, "out", "--out");
        fs::create_directories(rc.out_dir);

        rc.cfg = std::move(cfg);
        const std::string command = sub->get_name();
        if (command == "transform") {
            cmd_transform(rc);
        } else if (command == "evaluate") {
            cmd_evaluate(rc);
        } else if (command == "sweep") {
            cmd_sweep(rc);
        } else if (command == "saturate") {
            cmd_saturate(rc);
        } else {
            cmd_analyze(rc);
        }

        RunManifest m;
        m.command = command;
        m.argv = args;
        m.config = rc.cfg;
        m.seed = rc.cfg.at("seed").get<unsigned long long>();
        m.started_at = started;
        m.finished_at = std::chrono::system_clock::now();
        m.outputs = rc.outputs;
        write_manifest(rc.out_dir, m);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace rankbench
