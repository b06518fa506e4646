#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankbench/metrics.hpp"
#include "rankbench/verifier_eval.hpp"

namespace rankbench {

struct SweepPoint {
    int count = 0;
    std::optional<MetricsReport> report;  // absent when this count failed outright
    std::size_t failures = 0;
    std::string error;
};

/// Runs evaluate_verifier once per requested test count. A failing count is
/// recorded on its point and does not stop the others.
std::vector<SweepPoint> scaling_sweep(std::span<const RankedEntry> benchmark, const VerifierConfig& base,
                                      const VerifierResources& resources, std::span<const int> counts,
                                      MaeMode mae_mode = MaeMode::per_problem);

nlohmann::json sweep_point_to_json(const SweepPoint& p);
std::string sweep_csv(std::span<const SweepPoint> points);

}  // namespace rankbench
