#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankbench/benchmark_io.hpp"
#include "rankbench/sandbox.hpp"

namespace rankbench {

/// passes[s][t]: solution s passed test t.
struct OutcomeMatrix {
    std::string task_id;
    std::vector<std::vector<bool>> passes;

    std::size_t solution_count() const { return passes.size(); }
    std::size_t test_count() const { return passes.empty() ? 0 : passes.front().size(); }
};

nlohmann::json matrix_to_json(const OutcomeMatrix& m);
OutcomeMatrix matrix_from_json(const nlohmann::json& j);

/// Runs every ranked solution against `tests`.
OutcomeMatrix build_outcome_matrix(const RankedEntry& entry, std::span<const std::string> tests,
                                   const Sandbox& sandbox);

enum class IntervalMethod { percentile, mean };

IntervalMethod parse_interval_method(std::string_view s);

struct SaturationParams {
    int k_max = 0;  // 0: largest test count in the input
    int reps = 1000;
    std::uint64_t seed = 0;
    IntervalMethod interval = IntervalMethod::percentile;
    std::size_t workers = 1;
};

struct SaturationRow {
    int k = 0;
    double rho_mean = 0.0;
    double rho_ci_low = 0.0;
    double rho_ci_high = 0.0;
    double rho_std = 0.0;
    std::size_t clamped_problems = 0;  // problems with fewer than k tests, sampled in full
};

nlohmann::json saturation_row_to_json(const SaturationRow& r);

/// Repetition r at size k draws from an engine seeded by (seed, k, r), so rows
/// do not depend on scheduling.
std::vector<SaturationRow> saturation_analysis(std::span<const OutcomeMatrix> matrices, const SaturationParams& params);

std::string saturation_csv(std::span<const SaturationRow> rows);

}  // namespace rankbench
