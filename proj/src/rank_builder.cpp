#include "rankbench/rank_builder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "rankbench/errors.hpp"

namespace rankbench {

using nlohmann::json;

namespace {

// Distance ties (within rounding noise) break toward the higher score.
constexpr double kTieEps = 1e-12;

}  // namespace

void validate(const SelectionParams& p) {
    if (p.k < 2) throw ConfigError("k must be >= 2");
    if (p.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
}

ScoredSolution make_scored(std::string code, std::vector<ExecutionOutcome> outcomes, int order) {
    if (outcomes.empty()) throw std::invalid_argument("make_scored: no outcomes");
    ScoredSolution s;
    s.code = std::move(code);
    std::size_t passes = 0;
    double total_ms = 0.0;
    for (const auto& o : outcomes) {
        if (o.status == ExecStatus::pass) ++passes;
        total_ms += o.elapsed_ms;
    }
    s.score = static_cast<double>(passes) / static_cast<double>(outcomes.size());
    s.mean_exec_ms = total_ms / static_cast<double>(outcomes.size());
    s.outcomes = std::move(outcomes);
    s.order = order;
    return s;
}

ScoredSolution score_solution(std::string code, const Problem& problem, const Sandbox& sandbox, int order) {
    if (problem.predefined_tests.empty()) {
        throw std::invalid_argument("score_solution: problem '" + problem.task_id + "' has no tests");
    }
    auto outcomes = sandbox.execute_suite(code, problem.predefined_tests);
    return make_scored(std::move(code), std::move(outcomes), order);
}

std::vector<ScoredSolution> dedupe(std::vector<ScoredSolution> solutions) {
    std::vector<ScoredSolution> out;
    std::map<double, std::size_t> slot;
    for (auto& s : solutions) {
        auto [it, inserted] = slot.try_emplace(s.score, out.size());
        if (inserted) {
            out.push_back(std::move(s));
            continue;
        }
        auto& kept = out[it->second];
        if (s.mean_exec_ms < kept.mean_exec_ms || (s.mean_exec_ms == kept.mean_exec_ms && s.order < kept.order)) {
            kept = std::move(s);
        }
    }
    return out;
}

std::vector<ScoredSolution> filter_trivial_failures(std::vector<ScoredSolution> solutions) {
    std::erase_if(solutions, [](const ScoredSolution& s) {
        if (s.score != 0.0) return false;
        return std::none_of(s.outcomes.begin(), s.outcomes.end(),
                            [](const ExecutionOutcome& o) { return o.status == ExecStatus::assert_fail; });
    });
    return solutions;
}

double minimum_score(std::span<const double> scores) {
    if (scores.empty()) throw std::invalid_argument("minimum_score: empty score list");
    if (scores.front() != 1.0) throw ValidationError("minimum_score: no solution scores 1.0 (ground truth missing)");
    if (!std::is_sorted(scores.begin(), scores.end(), std::greater<>())) {
        throw std::invalid_argument("minimum_score: scores must be sorted descending");
    }
    std::optional<double> low;
    for (double s : scores) {
        if (s > 0.0 && s < 0.1 && (!low || s < *low)) low = s;
    }
    return low.value_or(scores.back());
}

namespace {

// 1 - (i/d)(1 - m) rearranged to (d - i + i*m) / d, which rounds hand-traced
// decimals like 0.7625 to the nearest double.
double target_value(int i, int d, double m) {
    return (static_cast<double>(d - i) + static_cast<double>(i) * m) / static_cast<double>(d);
}

}  // namespace

std::vector<double> selection_targets(int effective_k, double m, TargetRule rule) {
    if (effective_k < 2) throw std::invalid_argument("selection_targets: effective k must be >= 2");
    std::vector<double> t;
    if (rule == TargetRule::reconciled) {
        for (int i = 1; i <= effective_k - 2; ++i) {
            t.push_back(target_value(i, effective_k - 1, m));
        }
    } else {
        for (int i = 1; i <= effective_k - 1; ++i) {
            t.push_back(target_value(i, effective_k, m));
        }
    }
    return t;
}

std::vector<ScoredSolution> select_solutions(std::vector<ScoredSolution> pool, const SelectionParams& params) {
    std::stable_sort(pool.begin(), pool.end(),
                     [](const ScoredSolution& a, const ScoredSolution& b) { return a.score > b.score; });
    for (std::size_t i = 1; i < pool.size(); ++i) {
        if (pool[i].score == pool[i - 1].score) throw std::invalid_argument("select_solutions: pool is not deduplicated");
    }
    if (pool.empty() || pool.front().score != 1.0) {
        throw ValidationError("select_solutions: pool has no solution scoring 1.0");
    }
    const int n = static_cast<int>(pool.size());
    const int k_eff = std::min(n, params.k);
    if (k_eff < 2) throw ValidationError("select_solutions: need at least two uniquely scored solutions");

    std::vector<double> scores;
    for (const auto& s : pool) scores.push_back(s.score);
    const double m = minimum_score(scores);
    const auto m_index = static_cast<std::size_t>(std::find(scores.begin(), scores.end(), m) - scores.begin());

    std::vector<bool> chosen(pool.size(), false);
    chosen[m_index] = true;
    if (params.target_rule == TargetRule::reconciled) chosen[0] = true;

    for (double target : selection_targets(k_eff, m, params.target_rule)) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (chosen[i]) continue;
            if (!best) {
                best = i;
                continue;
            }
            const double d = std::abs(pool[i].score - target);
            const double bd = std::abs(pool[*best].score - target);
            // Pool is descending, so an equal distance later in the scan is a
            // lower score and loses the tie.
            if (d < bd - kTieEps) best = i;
        }
        if (!best) break;
        chosen[*best] = true;
    }

    std::vector<ScoredSolution> out;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (chosen[i]) out.push_back(std::move(pool[i]));
    }
    return out;
}

json deficit_to_json(const DeficitReport& d) {
    return {{"task_id", d.task_id},
            {"rounds_used", d.rounds_used},
            {"unique_scores", d.unique_scores},
            {"reason", d.reason},
            {"kept_partial", d.kept_partial}};
}

namespace {

RankedEntry to_entry(const Problem& problem, const std::vector<ScoredSolution>& selected) {
    RankedEntry e;
    e.task_id = problem.task_id;
    e.question = problem.question;
    e.test_count = static_cast<int>(problem.predefined_tests.size());
    int rank = 1;
    for (const auto& s : selected) e.solutions.push_back({s.code, s.score, rank++, s.mean_exec_ms});
    return e;
}

}  // namespace

TransformOutcome transform_problem(const Problem& problem, const TransformContext& ctx) {
    validate(ctx.selection);
    if (!ctx.sandbox) throw ConfigError("transform: no sandbox configured");
    if (problem.predefined_tests.empty()) {
        return {std::nullopt, DeficitReport{problem.task_id, 0, 0, "no predefined tests", false}};
    }

    std::vector<ScoredSolution> pool;
    std::set<std::string> seen_code;
    int order = 0;

    const auto add_candidates = [&](std::vector<std::string> codes) {
        std::vector<SuiteJob> jobs;
        for (auto& c : codes) {
            if (seen_code.insert(c).second) jobs.push_back({std::move(c), problem.predefined_tests});
        }
        auto results = ctx.sandbox->run_batch(jobs);
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            pool.push_back(make_scored(std::move(jobs[i].solution_code), std::move(results[i]), order++));
        }
    };

    const auto ranked_pool = [&] { return dedupe(filter_trivial_failures(pool)); };
    const auto has_top = [](const std::vector<ScoredSolution>& p) {
        return std::any_of(p.begin(), p.end(), [](const ScoredSolution& s) { return s.score == 1.0; });
    };

    if (ctx.selection.include_canonical && problem.canonical_solution) add_candidates({*problem.canonical_solution});

    int rounds_used = 0;
    std::vector<ScoredSolution> current = ranked_pool();
    while (rounds_used < ctx.selection.max_rounds &&
           !(has_top(current) && static_cast<int>(current.size()) >= ctx.selection.k)) {
        for (ChatClient* client : ctx.clients) {
            auto gen = generate_solutions(problem, *client, ctx.generation, rounds_used);
            if (ctx.on_record) {
                for (const auto& r : gen.records) ctx.on_record(r);
            }
            add_candidates(std::move(gen.candidates));
        }
        ++rounds_used;
        current = ranked_pool();
    }

    const int unique = static_cast<int>(current.size());
    if (has_top(current) && unique >= ctx.selection.k) {
        return {to_entry(problem, select_solutions(std::move(current), ctx.selection)), std::nullopt};
    }

    DeficitReport report{problem.task_id, rounds_used, unique, "", false};
    if (!has_top(current)) {
        report.reason = "no solution passes every predefined test";
        return {std::nullopt, report};
    }
    report.reason = "fewer than k uniquely scored solutions";
    if (ctx.selection.on_deficit == DeficitPolicy::keep_partial && unique >= 2) {
        report.kept_partial = true;
        return {to_entry(problem, select_solutions(std::move(current), ctx.selection)), report};
    }
    return {std::nullopt, report};
}

TransformResult transform_benchmark(std::span<const Problem> problems, const TransformContext& ctx) {
    TransformResult out;
    for (const auto& p : problems) {
        auto r = transform_problem(p, ctx);
        if (r.entry) out.entries.push_back(std::move(*r.entry));
        if (r.deficit) out.deficits.push_back(std::move(*r.deficit));
    }
    return out;
}

}  // namespace rankbench
