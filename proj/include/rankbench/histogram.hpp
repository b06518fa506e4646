#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankbench/benchmark_io.hpp"
#include "rankbench/verifier_eval.hpp"

namespace rankbench {

/// Numeric histograms carry edges (bins [e_i, e_{i+1}), the last closed);
/// categorical ones carry labels instead.
struct HistogramData {
    std::string name;
    std::vector<double> edges;
    std::vector<std::string> labels;
    std::vector<std::size_t> counts;

    std::size_t total() const;
};

/// 20 bins of width 0.05 over [0, 1].
std::vector<double> score_bin_edges();
std::size_t score_bin(double score);

HistogramData score_distribution(std::span<const RankedEntry> entries);
HistogramData score_range(std::span<const RankedEntry> entries);
HistogramData solutions_per_problem(std::span<const RankedEntry> entries);
HistogramData testgen_error_distribution(std::span<const VerifierEstimate> estimates);

nlohmann::json histogram_to_json(const HistogramData& h);
std::string histogram_csv(const HistogramData& h);

}  // namespace rankbench
