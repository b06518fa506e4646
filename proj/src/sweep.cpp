#include "rankbench/sweep.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace rankbench {

std::vector<SweepPoint> scaling_sweep(std::span<const RankedEntry> benchmark, const VerifierConfig& base,
                                      const VerifierResources& resources, std::span<const int> counts,
                                      MaeMode mae_mode) {
    std::vector<SweepPoint> out;
    for (int count : counts) {
        SweepPoint p;
        p.count = count;
        try {
            VerifierConfig cfg = base;
            cfg.test_count = count;
            const auto result = evaluate_verifier(benchmark, cfg, resources);
            p.failures = result.failures.size();
            p.report = aggregate(result.estimates, mae_mode);
        } catch (const std::exception& e) {
            p.error = e.what();
        }
        out.push_back(std::move(p));
    }
    return out;
}

nlohmann::json sweep_point_to_json(const SweepPoint& p) {
    nlohmann::json j = {{"count", p.count}, {"failures", p.failures}};
    j["report"] = p.report ? report_to_json(*p.report) : nlohmann::json(nullptr);
    if (!p.error.empty()) j["error"] = p.error;
    return j;
}

std::string sweep_csv(std::span<const SweepPoint> points) {
    std::ostringstream out;
    out << "count,top1,spearman,bottom1,mae,n_problems,n_excluded,failures\n";
    char buf[256];
    for (const auto& p : points) {
        if (p.report) {
            const auto& r = *p.report;
            std::snprintf(buf, sizeof buf, "%d,%.4f,%.6f,%.4f,%.6f,%zu,%zu,%zu\n", p.count, r.top1, r.spearman,
                          r.bottom1, r.mae, r.n_problems, r.n_excluded, p.failures);
        } else {
            std::snprintf(buf, sizeof buf, "%d,,,,,0,0,%zu\n", p.count, p.failures);
        }
        out << buf;
    }
    return out.str();
}

}  // namespace rankbench
