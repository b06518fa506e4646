#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rankbench/benchmark_io.hpp"
#include "rankbench/chat_client.hpp"
#include "rankbench/prompts.hpp"
#include "rankbench/sandbox.hpp"

namespace rankbench {

enum class VerifierKind { generated_tests, reward_model };

std::string_view to_string(VerifierKind k);
VerifierKind parse_verifier_kind(std::string_view s);

struct GeneratedTestSuite {
    std::string task_id;
    std::vector<std::string> assertions;
    int requested_count = 10;
    std::string raw_response;
    std::optional<int> solution_rank;  // set for with-solution suites
};

nlohmann::json suite_to_json(const GeneratedTestSuite& s);
GeneratedTestSuite suite_from_json(const nlohmann::json& j);

struct OutcomeCounts {
    int pass = 0;
    int assert_fail = 0;
    int error = 0;
    int timeout = 0;

    int total() const { return pass + assert_fail + error + timeout; }
    void add(ExecStatus s);
};

struct SolutionEstimate {
    int rank_expected = 0;
    double score_expected = 0.0;
    std::optional<double> score_estimated;  // absent: verifier failed on this solution
    std::optional<OutcomeCounts> outcomes;  // generated-test verifiers only
    std::optional<double> raw_reward;       // reward verifiers only
};

struct VerifierEstimate {
    std::string task_id;
    VerifierKind verifier_kind = VerifierKind::generated_tests;
    std::vector<SolutionEstimate> per_solution;

    bool complete() const;
    std::vector<double> expected() const;
    std::vector<double> estimated() const;  // requires complete()
};

nlohmann::json estimate_to_json(const VerifierEstimate& e);
VerifierEstimate estimate_from_json(const nlohmann::json& j);

struct RewardAssessment {
    std::vector<double> raw_scores;
    std::vector<double> normalized;
};

/// Per-problem min-max scaling into [0, 1]; a constant vector maps to 0.5.
RewardAssessment normalize_rewards(std::span<const double> raw_scores);

/// Without-solution template unless `solution` is supplied.
std::string render_testgen_prompt(std::string_view question, const std::optional<std::string>& solution, int count);

/// Interiors of well-formed <assertion>...</assertion> pairs in order, trimmed.
/// Interiors that do not start with `assert` are dropped (reported through
/// `dropped` when given).
std::vector<std::string> extract_assertions(std::string_view response, std::vector<std::string>* dropped = nullptr);

/// Throws std::invalid_argument on an empty suite.
VerifierEstimate score_with_generated_tests(const RankedEntry& entry, const GeneratedTestSuite& suite,
                                            const Sandbox& sandbox);

/// Reads a scalar reward from a response: a bare number, an `attr:value`
/// list (picking `attribute`), or OpenAI-style logprob tokens.
std::optional<double> parse_reward(const ChatResponse& response, std::string_view attribute);

struct RewardOptions {
    PromptTemplate user = prompts::reward_user();
    PromptTemplate assistant = prompts::reward_assistant();
    std::string attribute = "correctness";
    RetryPolicy retry;
    int max_in_flight = 4;
};

VerifierEstimate score_with_reward_model(const RankedEntry& entry, ChatClient& client,
                                         const RewardOptions& options = {});

enum class SuiteSource { generated, reference, file };

struct VerifierConfig {
    VerifierKind kind = VerifierKind::generated_tests;
    SuiteSource suite_source = SuiteSource::generated;
    int test_count = 10;
    bool with_solution = false;
    double temperature = 1.0;
    double top_p = 0.95;
    std::optional<long long> seed;
    std::optional<int> max_tokens;
    RetryPolicy retry;
    int max_in_flight = 4;
    RewardOptions reward;
    // reference / file suites, keyed by task_id
    std::map<std::string, GeneratedTestSuite> suites;
};

struct VerifierFailure {
    std::string task_id;
    std::string reason;
};

struct EvaluationResult {
    std::vector<VerifierEstimate> estimates;
    std::vector<GeneratedTestSuite> suites;
    std::vector<VerifierFailure> failures;
};

struct VerifierResources {
    ChatClient* client = nullptr;
    const Sandbox* sandbox = nullptr;
};

/// Reference suites built from a source benchmark's predefined tests.
std::map<std::string, GeneratedTestSuite> reference_suites(std::span<const Problem> problems);

/// Per-entry failures are recorded, never thrown.
EvaluationResult evaluate_verifier(std::span<const RankedEntry> benchmark, const VerifierConfig& cfg,
                                   const VerifierResources& resources);

}  // namespace rankbench
