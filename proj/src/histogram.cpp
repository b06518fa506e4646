#include "rankbench/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rankbench {

std::size_t HistogramData::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::vector<double> score_bin_edges() {
    std::vector<double> e;
    for (int i = 0; i <= 20; ++i) e.push_back(i / 20.0);
    return e;
}

std::size_t score_bin(double score) {
    if (!(score >= 0.0 && score <= 1.0)) throw std::invalid_argument("score_bin: score outside [0, 1]");
    // The nudge keeps exact multiples of 0.05 (e.g. 0.15 stored as 0.1499...) in their own bin.
    const auto idx = static_cast<std::size_t>(std::floor(score * 20.0 + 1e-9));
    return std::min<std::size_t>(idx, 19);
}

namespace {

HistogramData score_histogram(std::string name, const std::vector<double>& values) {
    HistogramData h{std::move(name), score_bin_edges(), {}, std::vector<std::size_t>(20, 0)};
    for (double v : values) ++h.counts[score_bin(v)];
    return h;
}

}  // namespace

HistogramData score_distribution(std::span<const RankedEntry> entries) {
    std::vector<double> v;
    for (const auto& e : entries)
        for (const auto& s : e.solutions) v.push_back(s.score);
    return score_histogram("score_distribution", v);
}

HistogramData score_range(std::span<const RankedEntry> entries) {
    std::vector<double> v;
    for (const auto& e : entries) {
        if (e.solutions.empty()) continue;
        const auto [lo, hi] = std::minmax_element(e.solutions.begin(), e.solutions.end(),
                                                  [](const auto& a, const auto& b) { return a.score < b.score; });
        v.push_back(hi->score - lo->score);
    }
    return score_histogram("score_range", v);
}

HistogramData solutions_per_problem(std::span<const RankedEntry> entries) {
    std::size_t widest = 0;
    for (const auto& e : entries) widest = std::max(widest, e.solutions.size());
    HistogramData h{"solutions_per_problem", {}, {}, std::vector<std::size_t>(widest + 1, 0)};
    // Integer bins [n - 0.5, n + 0.5) for n = 0..widest.
    for (std::size_t n = 0; n <= widest + 1; ++n) h.edges.push_back(static_cast<double>(n) - 0.5);
    for (const auto& e : entries) ++h.counts[e.solutions.size()];
    return h;
}

HistogramData testgen_error_distribution(std::span<const VerifierEstimate> estimates) {
    HistogramData h{"testgen_error_distribution", {}, {"pass", "assert_fail", "error", "timeout"}, {0, 0, 0, 0}};
    for (const auto& e : estimates) {
        for (const auto& s : e.per_solution) {
            if (!s.outcomes) continue;
            h.counts[0] += static_cast<std::size_t>(s.outcomes->pass);
            h.counts[1] += static_cast<std::size_t>(s.outcomes->assert_fail);
            h.counts[2] += static_cast<std::size_t>(s.outcomes->error);
            h.counts[3] += static_cast<std::size_t>(s.outcomes->timeout);
        }
    }
    return h;
}

nlohmann::json histogram_to_json(const HistogramData& h) {
    nlohmann::json j = {{"name", h.name}, {"counts", h.counts}, {"total", h.total()}};
    if (!h.labels.empty()) {
        j["labels"] = h.labels;
    } else {
        j["edges"] = h.edges;
    }
    return j;
}

std::string histogram_csv(const HistogramData& h) {
    std::ostringstream out;
    char buf[128];
    if (!h.labels.empty()) {
        out << "label,count\n";
        for (std::size_t i = 0; i < h.counts.size(); ++i) out << h.labels[i] << ',' << h.counts[i] << '\n';
        return out.str();
    }
    out << "bin_low,bin_high,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f,%zu\n", h.edges[i], h.edges[i + 1], h.counts[i]);
        out << buf;
    }
    return out.str();
}

}  // namespace rankbench
