#include "rankbench/saturation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rankbench/errors.hpp"
#include "rankbench/metrics.hpp"
#include "rankbench/parallel.hpp"

namespace rankbench {

using nlohmann::json;

json matrix_to_json(const OutcomeMatrix& m) {
    json rows = json::array();
    for (const auto& row : m.passes) {
        std::string bits;
        for (bool b : row) bits.push_back(b ? '1' : '0');
        rows.push_back(bits);
    }
    return {{"task_id", m.task_id}, {"passes", rows}};
}

OutcomeMatrix matrix_from_json(const json& j) {
    OutcomeMatrix m;
    m.task_id = j.at("task_id").get<std::string>();
    for (const auto& row : j.at("passes")) {
        std::vector<bool> bits;
        for (char c : row.get<std::string>()) {
            if (c != '0' && c != '1') throw ValidationError("outcome matrix row must contain only 0/1");
            bits.push_back(c == '1');
        }
        if (!m.passes.empty() && bits.size() != m.passes.front().size()) {
            throw ValidationError("ragged outcome matrix for '" + m.task_id + "'");
        }
        m.passes.push_back(std::move(bits));
    }
    return m;
}

OutcomeMatrix build_outcome_matrix(const RankedEntry& entry, std::span<const std::string> tests,
                                   const Sandbox& sandbox) {
    std::vector<SuiteJob> jobs;
    for (const auto& s : entry.solutions) jobs.push_back({s.code, {tests.begin(), tests.end()}});
    const auto results = sandbox.run_batch(jobs);
    OutcomeMatrix m{entry.task_id, {}};
    for (const auto& outcomes : results) {
        std::vector<bool> row;
        for (const auto& o : outcomes) row.push_back(o.status == ExecStatus::pass);
        m.passes.push_back(std::move(row));
    }
    return m;
}

IntervalMethod parse_interval_method(std::string_view s) {
    if (s == "percentile") return IntervalMethod::percentile;
    if (s == "mean") return IntervalMethod::mean;
    throw ConfigError("unknown interval method '" + std::string(s) + "'");
}

json saturation_row_to_json(const SaturationRow& r) {
    return {{"k", r.k},
            {"rho_mean", r.rho_mean},
            {"rho_ci_low", r.rho_ci_low},
            {"rho_ci_high", r.rho_ci_high},
            {"rho_std", r.rho_std},
            {"clamped_problems", r.clamped_problems}};
}

namespace {

std::vector<double> pass_fractions(const OutcomeMatrix& m, std::span<const std::size_t> tests) {
    std::vector<double> out;
    for (const auto& row : m.passes) {
        std::size_t hits = 0;
        for (auto t : tests) hits += row[t] ? 1 : 0;
        out.push_back(static_cast<double>(hits) / static_cast<double>(tests.size()));
    }
    return out;
}

// Linear interpolation between closest ranks.
double percentile(std::span<const double> sorted, double q) {
    if (sorted.size() == 1) return sorted.front();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<SaturationRow> saturation_analysis(std::span<const OutcomeMatrix> matrices, const SaturationParams& params) {
    if (matrices.empty()) throw std::invalid_argument("saturation_analysis: no problems");
    if (params.reps < 1) throw std::invalid_argument("saturation_analysis: reps must be >= 1");
    std::size_t widest = 0;
    std::vector<std::vector<double>> full;
    std::vector<std::size_t> all_tests;
    for (const auto& m : matrices) {
        if (m.solution_count() < 2 || m.test_count() == 0) {
            throw std::invalid_argument("saturation_analysis: '" + m.task_id + "' needs >= 2 solutions and >= 1 test");
        }
        widest = std::max(widest, m.test_count());
        all_tests.resize(m.test_count());
        std::iota(all_tests.begin(), all_tests.end(), 0);
        full.push_back(pass_fractions(m, all_tests));
    }
    const int k_max = params.k_max > 0 ? params.k_max : static_cast<int>(widest);

    std::vector<SaturationRow> rows;
    for (int k = 1; k <= k_max; ++k) {
        std::vector<double> rho(static_cast<std::size_t>(params.reps));
        parallel_for_index(rho.size(), params.workers, [&](std::size_t rep) {
            std::seed_seq seq{static_cast<std::uint64_t>(params.seed & 0xffffffffu),
                              static_cast<std::uint64_t>(params.seed >> 32), static_cast<std::uint64_t>(k),
                              static_cast<std::uint64_t>(rep)};
            std::mt19937_64 rng(seq);
            double sum = 0.0;
            std::vector<std::size_t> idx;
            for (std::size_t p = 0; p < matrices.size(); ++p) {
                const std::size_t n = matrices[p].test_count();
                const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), n);
                idx.resize(n);
                std::iota(idx.begin(), idx.end(), 0);
                // Partial Fisher-Yates: the first `take` slots are the sample.
                for (std::size_t i = 0; i < take; ++i) {
                    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
                    std::swap(idx[i], idx[pick(rng)]);
                }
                const auto sub = pass_fractions(matrices[p], std::span(idx).first(take));
                sum += spearman(full[p], sub);
            }
            rho[rep] = sum / static_cast<double>(matrices.size());
        });

        SaturationRow row;
        row.k = k;
        for (const auto& m : matrices) row.clamped_problems += m.test_count() < static_cast<std::size_t>(k) ? 1 : 0;
        const double n = static_cast<double>(rho.size());
        row.rho_mean = std::accumulate(rho.begin(), rho.end(), 0.0) / n;
        double var = 0.0;
        for (double r : rho) var += (r - row.rho_mean) * (r - row.rho_mean);
        row.rho_std = std::sqrt(var / n);
        if (params.interval == IntervalMethod::mean) {
            const double half = 1.96 * row.rho_std / std::sqrt(n);
            row.rho_ci_low = row.rho_mean - half;
            row.rho_ci_high = row.rho_mean + half;
        } else {
            std::sort(rho.begin(), rho.end());
            // A skewed repetition distribution can put the mean outside the
            // central 95%; widen so the interval always contains it.
            row.rho_ci_low = std::min(percentile(rho, 0.025), row.rho_mean);
            row.rho_ci_high = std::max(percentile(rho, 0.975), row.rho_mean);
        }
        rows.push_back(row);
    }
    return rows;
}

std::string saturation_csv(std::span<const SaturationRow> rows) {
    std::ostringstream out;
    out << "k,rho_mean,rho_ci_low,rho_ci_high,rho_std,clamped_problems\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f,%zu\n", r.k, r.rho_mean, r.rho_ci_low, r.rho_ci_high,
                      r.rho_std, r.clamped_problems);
        out << buf;
    }
    return out.str();
}

}  // namespace rankbench
