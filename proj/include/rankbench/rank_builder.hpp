#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankbench/benchmark_io.hpp"
#include "rankbench/chat_client.hpp"
#include "rankbench/sandbox.hpp"
#include "rankbench/solution_gen.hpp"

namespace rankbench {

struct ScoredSolution {
    std::string code;
    std::vector<ExecutionOutcome> outcomes;
    double score = 0.0;         // passes / outcomes
    double mean_exec_ms = 0.0;  // mean elapsed over all outcomes
    int order = 0;              // generation order, earliest first
};

/// Builds a ScoredSolution from already-executed outcomes.
ScoredSolution make_scored(std::string code, std::vector<ExecutionOutcome> outcomes, int order = 0);

enum class DeficitPolicy { drop, keep_partial };

// `reconciled`: rank 1 is the 1.0 solution, the last slot is m, and interior
// targets are evenly spaced between them. `literal`: targets 1 - (i/k')(1-m)
// for i = 1..k'-1 with m appended last; kept for comparison only.
enum class TargetRule { reconciled, literal };

struct SelectionParams {
    int k = 5;
    int max_rounds = 3;
    DeficitPolicy on_deficit = DeficitPolicy::keep_partial;
    TargetRule target_rule = TargetRule::reconciled;
    bool include_canonical = true;
};

void validate(const SelectionParams& params);

ScoredSolution score_solution(std::string code, const Problem& problem, const Sandbox& sandbox, int order = 0);

/// One survivor per distinct score: lowest mean_exec_ms, then earliest order.
/// Output keeps the first-appearance order of each score.
std::vector<ScoredSolution> dedupe(std::vector<ScoredSolution> solutions);

/// Drops score-0 solutions that never reached an assertion (every outcome is
/// error or timeout).
std::vector<ScoredSolution> filter_trivial_failures(std::vector<ScoredSolution> solutions);

/// The smallest score in (0, 0.1) if any, otherwise the last (smallest)
/// score. Requires a non-empty, descending list headed by 1.0.
double minimum_score(std::span<const double> descending_scores);

/// Target scores for interior picks, in selection order.
std::vector<double> selection_targets(int effective_k, double m, TargetRule rule = TargetRule::reconciled);

/// Chooses min(n, k) solutions spread over [m, 1.0]; output sorted by score
/// descending. Pool must be deduplicated. Throws ValidationError when no 1.0
/// member exists or fewer than two solutions can be chosen.
std::vector<ScoredSolution> select_solutions(std::vector<ScoredSolution> pool, const SelectionParams& params);

struct DeficitReport {
    std::string task_id;
    int rounds_used = 0;
    int unique_scores = 0;
    std::string reason;
    bool kept_partial = false;
};

nlohmann::json deficit_to_json(const DeficitReport& d);

struct TransformContext {
    std::vector<ChatClient*> clients;
    GenerationConfig generation;
    const Sandbox* sandbox = nullptr;
    SelectionParams selection;
    // Optional sink for generation audit records.
    std::function<void(const GenerationRecord&)> on_record;
};

struct TransformOutcome {
    std::optional<RankedEntry> entry;
    std::optional<DeficitReport> deficit;
};

TransformOutcome transform_problem(const Problem& problem, const TransformContext& ctx);

struct TransformResult {
    std::vector<RankedEntry> entries;
    std::vector<DeficitReport> deficits;
};

TransformResult transform_benchmark(std::span<const Problem> problems, const TransformContext& ctx);

}  // namespace rankbench
