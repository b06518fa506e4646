#include "rankbench/verifier_eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <regex>

#include "rankbench/errors.hpp"
#include "rankbench/parallel.hpp"

namespace rankbench {

using nlohmann::json;

std::string_view to_string(VerifierKind k) {
    return k == VerifierKind::reward_model ? "reward_model" : "generated_tests";
}

VerifierKind parse_verifier_kind(std::string_view s) {
    if (s == "generated_tests") return VerifierKind::generated_tests;
    if (s == "reward_model") return VerifierKind::reward_model;
    throw ValidationError("unknown verifier kind '" + std::string(s) + "'");
}

json suite_to_json(const GeneratedTestSuite& s) {
    json j = {{"task_id", s.task_id},
              {"assertions", s.assertions},
              {"requested_count", s.requested_count},
              {"raw_response", s.raw_response}};
    if (s.solution_rank) j["solution_rank"] = *s.solution_rank;
    return j;
}

GeneratedTestSuite suite_from_json(const json& j) {
    GeneratedTestSuite s;
    s.task_id = j.at("task_id").get<std::string>();
    s.assertions = j.at("assertions").get<std::vector<std::string>>();
    s.requested_count = j.value("requested_count", static_cast<int>(s.assertions.size()));
    s.raw_response = j.value("raw_response", std::string());
    if (auto it = j.find("solution_rank"); it != j.end() && it->is_number_integer()) s.solution_rank = it->get<int>();
    return s;
}

void OutcomeCounts::add(ExecStatus s) {
    switch (s) {
        case ExecStatus::pass: ++pass; break;
        case ExecStatus::assert_fail: ++assert_fail; break;
        case ExecStatus::error: ++error; break;
        case ExecStatus::timeout: ++timeout; break;
    }
}

bool VerifierEstimate::complete() const {
    return !per_solution.empty() &&
           std::all_of(per_solution.begin(), per_solution.end(), [](const auto& s) { return s.score_estimated.has_value(); });
}

std::vector<double> VerifierEstimate::expected() const {
    std::vector<double> v;
    for (const auto& s : per_solution) v.push_back(s.score_expected);
    return v;
}

std::vector<double> VerifierEstimate::estimated() const {
    std::vector<double> v;
    for (const auto& s : per_solution) v.push_back(s.score_estimated.value());
    return v;
}

json estimate_to_json(const VerifierEstimate& e) {
    json rows = json::array();
    for (const auto& s : e.per_solution) {
        json r = {{"rank_expected", s.rank_expected}, {"score_expected", s.score_expected}};
        r["score_estimated"] = s.score_estimated ? json(*s.score_estimated) : json(nullptr);
        if (s.outcomes) {
            r["outcomes"] = {{"pass", s.outcomes->pass},
                             {"assert_fail", s.outcomes->assert_fail},
                             {"error", s.outcomes->error},
                             {"timeout", s.outcomes->timeout}};
        }
        if (s.raw_reward) r["raw_reward"] = *s.raw_reward;
        rows.push_back(std::move(r));
    }
    return {{"task_id", e.task_id}, {"verifier_kind", to_string(e.verifier_kind)}, {"per_solution", rows}};
}

VerifierEstimate estimate_from_json(const json& j) {
    VerifierEstimate e;
    e.task_id = j.at("task_id").get<std::string>();
    e.verifier_kind = parse_verifier_kind(j.at("verifier_kind").get<std::string>());
    for (const auto& r : j.at("per_solution")) {
        SolutionEstimate s;
        s.rank_expected = r.at("rank_expected").get<int>();
        s.score_expected = r.at("score_expected").get<double>();
        if (const auto& v = r.at("score_estimated"); !v.is_null()) s.score_estimated = v.get<double>();
        if (auto it = r.find("outcomes"); it != r.end()) {
            s.outcomes = OutcomeCounts{it->at("pass").get<int>(), it->at("assert_fail").get<int>(),
                                       it->at("error").get<int>(), it->at("timeout").get<int>()};
        }
        if (auto it = r.find("raw_reward"); it != r.end()) s.raw_reward = it->get<double>();
        e.per_solution.push_back(std::move(s));
    }
    return e;
}

RewardAssessment normalize_rewards(std::span<const double> raw) {
    RewardAssessment a;
    a.raw_scores.assign(raw.begin(), raw.end());
    if (raw.empty()) return a;
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    const double range = *hi - *lo;
    for (double r : raw) a.normalized.push_back(range > 0 ? std::clamp((r - *lo) / range, 0.0, 1.0) : 0.5);
    return a;
}

std::string render_testgen_prompt(std::string_view question, const std::optional<std::string>& solution, int count) {
    if (count < 1) throw std::invalid_argument("render_testgen_prompt: count must be >= 1");
    std::map<std::string, std::string, std::less<>> values{{"question", std::string(question)},
                                                           {"count", std::to_string(count)}};
    if (solution) {
        values["solution"] = *solution;
        return substitute(prompts::testgen_with_solution().body, values);
    }
    return substitute(prompts::testgen_without_solution().body, values);
}

std::vector<std::string> extract_assertions(std::string_view response, std::vector<std::string>* dropped) {
    static constexpr std::string_view kOpen = "<assertion>";
    static constexpr std::string_view kClose = "</assertion>";
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (;;) {
        const auto open = response.find(kOpen, pos);
        if (open == std::string_view::npos) break;
        const auto body_start = open + kOpen.size();
        const auto close = response.find(kClose, body_start);
        if (close == std::string_view::npos) break;
        // A nested opener before the close means the first tag was never closed.
        const auto reopen = response.find(kOpen, body_start);
        if (reopen != std::string_view::npos && reopen < close) {
            pos = reopen;
            continue;
        }
        auto body = response.substr(body_start, close - body_start);
        const auto b = body.find_first_not_of(" \t\r\n");
        const auto e = body.find_last_not_of(" \t\r\n");
        const std::string text = b == std::string_view::npos ? std::string() : std::string(body.substr(b, e - b + 1));
        const bool is_assert = text.rfind("assert", 0) == 0 &&
                               (text.size() == 6 || !(std::isalnum(static_cast<unsigned char>(text[6])) || text[6] == '_'));
        if (is_assert) {
            out.push_back(text);
        } else if (dropped) {
            dropped->push_back(text);
        }
        pos = close + kClose.size();
    }
    return out;
}

VerifierEstimate score_with_generated_tests(const RankedEntry& entry, const GeneratedTestSuite& suite,
                                            const Sandbox& sandbox) {
    if (suite.assertions.empty()) {
        throw std::invalid_argument("score_with_generated_tests: empty suite for '" + entry.task_id + "'");
    }
    std::vector<SuiteJob> jobs;
    for (const auto& s : entry.solutions) jobs.push_back({s.code, suite.assertions});
    const auto results = sandbox.run_batch(jobs);

    VerifierEstimate est{entry.task_id, VerifierKind::generated_tests, {}};
    for (std::size_t i = 0; i < entry.solutions.size(); ++i) {
        OutcomeCounts counts;
        for (const auto& o : results[i]) counts.add(o.status);
        SolutionEstimate s;
        s.rank_expected = entry.solutions[i].rank;
        s.score_expected = entry.solutions[i].score;
        s.score_estimated = static_cast<double>(counts.pass) / static_cast<double>(counts.total());
        s.outcomes = counts;
        est.per_solution.push_back(s);
    }
    return est;
}

std::optional<double> parse_reward(const ChatResponse& response, std::string_view attribute) {
    const auto to_number = [](const std::string& s) -> std::optional<double> {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || !std::isfinite(v)) return std::nullopt;
        while (*end == ' ' || *end == '\n' || *end == '\t' || *end == '\r') ++end;
        if (*end != '\0') return std::nullopt;
        return v;
    };
    if (auto v = to_number(response.content)) return v;
    if (!attribute.empty()) {
        const std::regex pair("(?:^|[,\\s])" + std::string(attribute) + R"(\s*[:=]\s*(-?[0-9.eE+-]+))");
        std::smatch m;
        if (std::regex_search(response.content, m, pair)) {
            if (auto v = to_number(m[1].str())) return v;
        }
        // NVIDIA-style reward endpoints put attribute scores in logprobs tokens.
        try {
            if (response.raw.is_object()) {
                for (const auto& tok : response.raw.at("choices").at(0).at("logprobs").at("content")) {
                    if (tok.at("token").get<std::string>() == attribute) return tok.at("logprob").get<double>();
                }
            }
        } catch (const json::exception&) {
        }
    }
    return std::nullopt;
}

VerifierEstimate score_with_reward_model(const RankedEntry& entry, ChatClient& client, const RewardOptions& options) {
    const std::size_t n = entry.solutions.size();
    std::vector<std::optional<double>> raw(n);
    parallel_for_index(n, static_cast<std::size_t>(std::max(1, options.max_in_flight)), [&](std::size_t i) {
        ChatRequest req;
        req.messages = {
            {"user", substitute(options.user.body, {{"question", entry.question}})},
            {"assistant", substitute(options.assistant.body, {{"solution", entry.solutions[i].code}})},
        };
        req.temperature = 0.0;
        req.tag = RequestTag{"reward", entry.task_id, -1, static_cast<int>(i), 0};
        try {
            raw[i] = parse_reward(complete_with_retry(client, req, options.retry), options.attribute);
        } catch (const TransportError&) {
            raw[i] = std::nullopt;
        }
    });

    VerifierEstimate est{entry.task_id, VerifierKind::reward_model, {}};
    std::vector<double> present;
    for (const auto& r : raw) {
        if (r) present.push_back(*r);
    }
    const bool all_present = present.size() == n;
    const auto norm = normalize_rewards(present);
    for (std::size_t i = 0; i < n; ++i) {
        SolutionEstimate s;
        s.rank_expected = entry.solutions[i].rank;
        s.score_expected = entry.solutions[i].score;
        s.raw_reward = raw[i];
        if (all_present) s.score_estimated = norm.normalized[i];
        est.per_solution.push_back(s);
    }
    return est;
}

std::map<std::string, GeneratedTestSuite> reference_suites(std::span<const Problem> problems) {
    std::map<std::string, GeneratedTestSuite> out;
    for (const auto& p : problems) {
        out[p.task_id] = GeneratedTestSuite{p.task_id, p.predefined_tests, static_cast<int>(p.predefined_tests.size()),
                                            "", std::nullopt};
    }
    return out;
}

namespace {

GeneratedTestSuite request_suite(const RankedEntry& entry, const VerifierConfig& cfg, ChatClient& client,
                                 const std::optional<std::string>& solution, std::optional<int> rank) {
    ChatRequest req;
    req.messages = {{"user", render_testgen_prompt(entry.question, solution, cfg.test_count)}};
    req.temperature = cfg.temperature;
    req.top_p = cfg.top_p;
    req.seed = cfg.seed;
    req.max_tokens = cfg.max_tokens;
    req.tag = RequestTag{"testgen", entry.task_id, -1, rank ? *rank - 1 : -1, cfg.test_count};
    const auto resp = complete_with_retry(client, req, cfg.retry);
    GeneratedTestSuite suite{entry.task_id, extract_assertions(resp.content), cfg.test_count, resp.content, rank};
    return suite;
}

}  // namespace

EvaluationResult evaluate_verifier(std::span<const RankedEntry> benchmark, const VerifierConfig& cfg,
                                   const VerifierResources& res) {
    const bool needs_client = cfg.kind == VerifierKind::reward_model || cfg.suite_source == SuiteSource::generated;
    if (needs_client && !res.client) throw ConfigError("verifier needs a chat client");
    if (cfg.kind == VerifierKind::generated_tests && !res.sandbox) throw ConfigError("verifier needs a sandbox");
    if (cfg.test_count < 1) throw ConfigError("test count must be >= 1");

    const std::size_t n = benchmark.size();
    std::vector<std::optional<VerifierEstimate>> estimates(n);
    std::vector<std::vector<GeneratedTestSuite>> suites(n);
    std::vector<std::optional<std::string>> failures(n);

    // Client calls fan out across entries; each entry's executions already
    // use the sandbox pool.
    const std::size_t entry_workers =
        cfg.kind == VerifierKind::reward_model || cfg.suite_source == SuiteSource::generated
            ? static_cast<std::size_t>(std::max(1, cfg.max_in_flight))
            : 1;

    parallel_for_index(n, entry_workers, [&](std::size_t i) {
        const auto& entry = benchmark[i];
        try {
            if (cfg.kind == VerifierKind::reward_model) {
                auto est = score_with_reward_model(entry, *res.client, cfg.reward);
                if (!est.complete()) failures[i] = "reward missing for at least one solution";
                estimates[i] = std::move(est);
                return;
            }
            if (cfg.with_solution && cfg.suite_source == SuiteSource::generated) {
                // Each solution judged by the suite written while looking at it.
                VerifierEstimate combined{entry.task_id, VerifierKind::generated_tests, {}};
                for (const auto& sol : entry.solutions) {
                    auto suite = request_suite(entry, cfg, *res.client, sol.code, sol.rank);
                    suites[i].push_back(suite);
                    if (suite.assertions.empty()) {
                        failures[i] = "no assertions extracted for rank " + std::to_string(sol.rank);
                        return;
                    }
                    RankedEntry single = entry;
                    single.solutions = {sol};
                    combined.per_solution.push_back(
                        score_with_generated_tests(single, suite, *res.sandbox).per_solution.front());
                }
                estimates[i] = std::move(combined);
                return;
            }
            GeneratedTestSuite suite;
            if (cfg.suite_source == SuiteSource::generated) {
                suite = request_suite(entry, cfg, *res.client, std::nullopt, std::nullopt);
            } else {
                auto it = cfg.suites.find(entry.task_id);
                if (it == cfg.suites.end()) {
                    failures[i] = "no suite for task";
                    return;
                }
                suite = it->second;
            }
            suites[i].push_back(suite);
            if (suite.assertions.empty()) {
                failures[i] = "no assertions extracted";
                return;
            }
            estimates[i] = score_with_generated_tests(entry, suite, *res.sandbox);
        } catch (const TransportError& e) {
            failures[i] = std::string("transport: ") + e.what();
        } catch (const std::invalid_argument& e) {
            failures[i] = e.what();
        }
    });

    EvaluationResult out;
    for (std::size_t i = 0; i < n; ++i) {
        if (estimates[i]) out.estimates.push_back(std::move(*estimates[i]));
        for (auto& s : suites[i]) out.suites.push_back(std::move(s));
        if (failures[i]) out.failures.push_back({benchmark[i].task_id, *failures[i]});
    }
    return out;
}

}  // namespace rankbench
