#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rankbench {

struct Problem {
    std::string task_id;
    std::string question;
    std::optional<std::string> canonical_solution;
    std::vector<std::string> predefined_tests;
    std::optional<std::string> entry_point;

    bool operator==(const Problem&) const = default;
};

struct RankedSolution {
    std::string code;
    double score = 0.0;
    int rank = 0;
    double mean_exec_ms = 0.0;

    bool operator==(const RankedSolution&) const = default;
};

/// One row of a ranked benchmark: solutions ordered by strictly decreasing
/// score, rank i holding the i-th highest score, rank 1 scoring 1.0.
struct RankedEntry {
    std::string task_id;
    std::string question;
    std::vector<RankedSolution> solutions;
    int test_count = 0;

    bool operator==(const RankedEntry&) const = default;
};

struct BenchmarkStats {
    std::size_t problem_count = 0;
    double avg_tests = 0.0;
    std::size_t solution_count = 0;
    double avg_solution_score = 0.0;
};

enum class SourceSchema { humaneval, mbpp, generic };

SourceSchema parse_schema(std::string_view name);

/// Reads a source benchmark, one problem per line. Blank lines are skipped.
/// Throws ParseError (with line number) on malformed lines or missing fields
/// and ValidationError on duplicate task ids.
std::vector<Problem> load_benchmark(const std::filesystem::path& path, SourceSchema schema);

/// Parses one already-decoded line according to `schema`.
Problem problem_from_json(const nlohmann::json& j, SourceSchema schema);
nlohmann::json problem_to_json(const Problem& p);

/// Splits a HumanEval-style `check(candidate)` body into standalone
/// assertions calling `entry_point`. Returns the whole check plus a call to
/// it as a single test when the body has statements other than asserts.
std::vector<std::string> split_humaneval_check(std::string_view test_source,
                                               std::string_view entry_point);

/// Throws ValidationError naming the task id if `entry` breaks an invariant.
/// `max_solutions` of 0 disables the upper bound.
void validate_ranked_entry(const RankedEntry& entry, std::size_t max_solutions = 0);

nlohmann::json ranked_entry_to_json(const RankedEntry& entry);
RankedEntry ranked_entry_from_json(const nlohmann::json& j);

void write_ranked_benchmark(std::span<const RankedEntry> entries, const std::filesystem::path& path);
std::vector<RankedEntry> load_ranked_benchmark(const std::filesystem::path& path);

BenchmarkStats compute_stats(std::span<const RankedEntry> entries);
/// Source-side statistics: solution_count / avg_solution_score come from
/// `solution_scores`, aligned with `problems` (may be empty for test-only stats).
BenchmarkStats compute_stats(std::span<const Problem> problems,
                             std::span<const std::vector<double>> solution_scores);

nlohmann::json stats_to_json(const BenchmarkStats& stats);

// JSONL helpers shared by the other modules.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, std::span<const nlohmann::json> rows);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace rankbench
