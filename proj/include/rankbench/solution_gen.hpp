#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rankbench/benchmark_io.hpp"
#include "rankbench/chat_client.hpp"
#include "rankbench/prompts.hpp"

namespace rankbench {

struct GenerationConfig {
    double temperature = 1.0;
    double top_p = 0.95;
    std::vector<long long> seeds{1, 2, 3};
    int rounds = 3;
    std::vector<PromptTemplate> prompts{prompts::correct_solution(), prompts::incorrect_solution()};
    std::string language = "python";
    int max_in_flight = 4;
    std::optional<int> max_tokens;
    RetryPolicy retry;
};

void validate(const GenerationConfig& cfg);

/// Fills {question} (and {solution} when given). Throws ValidationError if
/// the body lacks a placeholder for a provided argument or requires one that
/// was not provided.
std::string render_prompt(const PromptTemplate& tmpl, std::string_view question,
                          const std::optional<std::string>& solution = std::nullopt);

/// First fenced block labeled `language` (aliases accepted for python);
/// otherwise the first unlabeled block; otherwise nothing. Whitespace-only
/// blocks count as nothing.
std::optional<std::string> extract_code(std::string_view response, std::string_view language = "python");

/// Audit record for one client call.
struct GenerationRecord {
    std::string task_id;
    std::string client;
    int iteration = 0;
    int round = 0;
    std::string prompt;
    long long seed = 0;
    int sample_index = 0;
    double temperature = 0.0;
    double top_p = 0.0;
    int attempts = 0;
    std::optional<std::string> response;
    std::optional<std::string> error;
    bool extracted = false;
};

nlohmann::json record_to_json(const GenerationRecord& r);

struct GenerationResult {
    std::vector<std::string> candidates;  // ordered by sample index
    std::vector<GenerationRecord> records;
};

/// One call per (round, prompt, seed). `iteration` offsets round numbers so
/// repeated invocations for the same problem issue distinct requests.
/// Transport failures are retried per cfg.retry and then recorded as skipped.
GenerationResult generate_solutions(const Problem& problem, ChatClient& client, const GenerationConfig& cfg,
                                    int iteration = 0);

}  // namespace rankbench
