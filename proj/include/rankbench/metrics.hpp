#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankbench/verifier_eval.hpp"

namespace rankbench {

// All functions throw std::invalid_argument on misaligned or too-short input.

/// Share of the estimated maxima that are the true best.
double top1(std::span<const double> expected, std::span<const double> estimated);
/// Share of the estimated minima that are the true worst.
double bottom1(std::span<const double> expected, std::span<const double> estimated);

/// 1-based ranks in ascending value order; ties get their mean position.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks. Defined as 0 when either rank vector
/// is constant.
double spearman(std::span<const double> expected, std::span<const double> estimated);

double mae(std::span<const double> expected, std::span<const double> estimated);

struct ProblemMetrics {
    std::string task_id;
    double top1 = 0.0;
    double bottom1 = 0.0;
    double spearman = 0.0;
    double mae = 0.0;
    std::size_t n_solutions = 0;
};

ProblemMetrics problem_metrics(const VerifierEstimate& estimate);
nlohmann::json problem_metrics_to_json(const ProblemMetrics& m);

enum class MaeMode { per_problem, pooled };

struct MetricsReport {
    double top1 = 0.0;     // percent
    double bottom1 = 0.0;  // percent
    double spearman = 0.0;
    double mae = 0.0;
    std::size_t n_problems = 0;
    std::size_t n_excluded = 0;
    std::string verifier_kind;
};

/// Unweighted mean over problems. Incomplete estimates are excluded and
/// counted; throws std::invalid_argument when nothing is left to average.
MetricsReport aggregate(std::span<const VerifierEstimate> estimates, MaeMode mae_mode = MaeMode::per_problem);

nlohmann::json report_to_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);

/// Aligned text table, columns Top-1, Spearman, Bottom-1, MAE.
std::string format_table(std::span<const std::pair<std::string, MetricsReport>> rows);

}  // namespace rankbench
