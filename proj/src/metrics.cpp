#include "rankbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rankbench {

namespace {

void check_aligned(std::span<const double> a, std::span<const double> b, std::size_t min_len, const char* who) {
    if (a.size() != b.size()) throw std::invalid_argument(std::string(who) + ": length mismatch");
    if (a.size() < min_len) throw std::invalid_argument(std::string(who) + ": too few values");
}

template <typename Better>
double extreme_credit(std::span<const double> expected, std::span<const double> estimated, Better better) {
    const double est_best = *std::max_element(estimated.begin(), estimated.end(), [&](double x, double y) { return better(y, x); });
    const double exp_best = *std::max_element(expected.begin(), expected.end(), [&](double x, double y) { return better(y, x); });
    std::size_t tied = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < estimated.size(); ++i) {
        if (estimated[i] != est_best) continue;
        ++tied;
        if (expected[i] == exp_best) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(tied);
}

}  // namespace

double top1(std::span<const double> expected, std::span<const double> estimated) {
    check_aligned(expected, estimated, 2, "top1");
    return extreme_credit(expected, estimated, std::greater<>());
}

double bottom1(std::span<const double> expected, std::span<const double> estimated) {
    check_aligned(expected, estimated, 2, "bottom1");
    return extreme_credit(expected, estimated, std::less<>());
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> expected, std::span<const double> estimated) {
    check_aligned(expected, estimated, 2, "spearman");
    const auto ra = average_ranks(expected);
    const auto rb = average_ranks(estimated);
    const double n = static_cast<double>(ra.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double da = ra[i] - ma;
        const double db = rb[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double mae(std::span<const double> expected, std::span<const double> estimated) {
    check_aligned(expected, estimated, 1, "mae");
    double sum = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) sum += std::abs(expected[i] - estimated[i]);
    return sum / static_cast<double>(expected.size());
}

ProblemMetrics problem_metrics(const VerifierEstimate& e) {
    if (!e.complete()) throw std::invalid_argument("problem_metrics: incomplete estimate for '" + e.task_id + "'");
    const auto exp = e.expected();
    const auto est = e.estimated();
    return {e.task_id, top1(exp, est), bottom1(exp, est), spearman(exp, est), mae(exp, est), exp.size()};
}

nlohmann::json problem_metrics_to_json(const ProblemMetrics& m) {
    return {{"task_id", m.task_id},     {"top1", m.top1}, {"bottom1", m.bottom1},
            {"spearman", m.spearman},   {"mae", m.mae},   {"n_solutions", m.n_solutions}};
}

MetricsReport aggregate(std::span<const VerifierEstimate> estimates, MaeMode mae_mode) {
    if (estimates.empty()) throw std::invalid_argument("aggregate: no estimates");
    MetricsReport r;
    r.verifier_kind = std::string(to_string(estimates.front().verifier_kind));
    double abs_sum = 0.0;
    std::size_t abs_n = 0;
    for (const auto& e : estimates) {
        if (!e.complete()) {
            ++r.n_excluded;
            continue;
        }
        const auto m = problem_metrics(e);
        r.top1 += m.top1;
        r.bottom1 += m.bottom1;
        r.spearman += m.spearman;
        r.mae += m.mae;
        abs_sum += m.mae * static_cast<double>(m.n_solutions);
        abs_n += m.n_solutions;
        ++r.n_problems;
    }
    if (r.n_problems == 0) throw std::invalid_argument("aggregate: every estimate is incomplete");
    const double n = static_cast<double>(r.n_problems);
    r.top1 = 100.0 * r.top1 / n;
    r.bottom1 = 100.0 * r.bottom1 / n;
    r.spearman /= n;
    r.mae = mae_mode == MaeMode::pooled ? abs_sum / static_cast<double>(abs_n) : r.mae / n;
    return r;
}

nlohmann::json report_to_json(const MetricsReport& r) {
    return {{"top1", r.top1},          {"spearman", r.spearman},     {"bottom1", r.bottom1},
            {"mae", r.mae},            {"n_problems", r.n_problems}, {"n_excluded", r.n_excluded},
            {"verifier_kind", r.verifier_kind}};
}

MetricsReport report_from_json(const nlohmann::json& j) {
    MetricsReport r;
    r.top1 = j.at("top1").get<double>();
    r.spearman = j.at("spearman").get<double>();
    r.bottom1 = j.at("bottom1").get<double>();
    r.mae = j.at("mae").get<double>();
    r.n_problems = j.at("n_problems").get<std::size_t>();
    r.n_excluded = j.value("n_excluded", std::size_t{0});
    r.verifier_kind = j.value("verifier_kind", std::string());
    return r;
}

std::string format_table(std::span<const std::pair<std::string, MetricsReport>> rows) {
    std::size_t name_w = 8;
    for (const auto& [name, _] : rows) name_w = std::max(name_w, name.size());
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s %8s %9s %9s %7s %5s\n", static_cast<int>(name_w), "Verifier", "Top-1",
                  "Spearman", "Bottom-1", "MAE", "N");
    out << buf;
    for (const auto& [name, r] : rows) {
        std::snprintf(buf, sizeof buf, "%-*s %8.1f %9.2f %9.1f %7.2f %5zu\n", static_cast<int>(name_w), name.c_str(),
                      r.top1, r.spearman, r.bottom1, r.mae, r.n_problems);
        out << buf;
    }
    return out.str();
}

}  // namespace rankbench
