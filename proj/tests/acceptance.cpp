// One PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "rankbench/benchmark_io.hpp"
#include "rankbench/metrics.hpp"
#include "rankbench/rank_builder.hpp"
#include "rankbench/saturation.hpp"
#include "test_support.hpp"

using namespace rankbench;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
}

int failures = 0;

// Runs `body`; a returned string is a skip reason.
void criterion(const std::string& name, double budget_s, const std::function<std::optional<std::string>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    std::optional<std::string> skipped;
    try {
        skipped = body();
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && !skipped && budget_s > 0 && secs > budget_s) {
        ok = false;
        detail = "took " + fmt(secs) + " s, budget " + fmt(budget_s) + " s";
    }
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2f s", secs);
    if (skipped) {
        std::cout << "SKIPPED " << name << " (" << *skipped << ")\n";
    } else if (ok) {
        std::cout << "PASS " << name << " (" << timing << ")\n";
    } else {
        ++failures;
        std::cout << "FAIL " << name << ": " << detail << " (" << timing << ")\n";
    }
    std::cout.flush();
}

ScoredSolution scored(double score, int order) {
    ScoredSolution s;
    s.code = "solution " + std::to_string(order);
    s.score = score;
    s.order = order;
    s.mean_exec_ms = 1.0;
    s.outcomes = {{score > 0 ? ExecStatus::pass : ExecStatus::assert_fail, std::nullopt, 1.0}};
    return s;
}

std::optional<std::string> selection_quantiles() {
    std::mt19937_64 rng(2024);
    const std::vector<double> quantiles{1.0, 0.75, 0.5, 0.25, 0.0};
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::uniform_int_distribution<int> extra(0, 20);
    SelectionParams params;
    params.k = 5;
    for (int pool_no = 0; pool_no < 200; ++pool_no) {
        std::set<double> scores(quantiles.begin(), quantiles.end());
        const int n_extra = extra(rng);
        while (static_cast<int>(scores.size()) < 5 + n_extra) scores.insert(u(rng));
        std::vector<double> shuffled(scores.begin(), scores.end());
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        std::vector<ScoredSolution> pool;
        for (std::size_t i = 0; i < shuffled.size(); ++i) pool.push_back(scored(shuffled[i], static_cast<int>(i)));
        const auto chosen = select_solutions(pool, params);
        std::vector<double> got;
        for (const auto& c : chosen) got.push_back(c.score);
        require(got == quantiles, "pool " + std::to_string(pool_no) + " selected a non-quantile score");
    }
    return std::nullopt;
}

std::optional<std::string> selection_math() {
    auto eq = [](const std::vector<double>& got, const std::vector<double>& want, const std::string& what) {
        require(got == want, what);
    };
    const std::vector<double> a{1.0, 0.6, 0.3, 0.05, 0.0}, b{1.0, 0.5, 0.2}, c{1.0, 0.0};
    require(minimum_score(a) == 0.05, "m of {1, .6, .3, .05, 0}");
    require(minimum_score(b) == 0.2, "m of {1, .5, .2}");
    require(minimum_score(c) == 0.0, "m of {1, 0}");
    // Hand-traced: T_i = 1 - i(1-m)/(k'-1).
    eq(selection_targets(5, 0.0), {0.75, 0.5, 0.25}, "targets k'=5 m=0");
    eq(selection_targets(5, 0.05), {0.7625, 0.525, 0.2875}, "targets k'=5 m=.05");
    eq(selection_targets(5, 0.2), {0.8, 0.6, 0.4}, "targets k'=5 m=.2");
    eq(selection_targets(3, 0.0), {0.5}, "targets k'=3 m=0");
    SelectionParams p;
    p.k = 5;
    std::vector<ScoredSolution> pool{scored(1.0, 0), scored(0.4, 1), scored(0.0, 2)};
    const auto chosen = select_solutions(pool, p);
    require(chosen.size() == 3 && chosen[0].score == 1.0 && chosen[1].score == 0.4 && chosen[2].score == 0.0,
            "pool {1, .4, 0} with k=5");
    return std::nullopt;
}

std::optional<std::string> metrics_oracle() {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> grid(0, 3);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
        std::vector<double> a(n), b(n);
        for (auto* v : {&a, &b})
            for (auto& x : *v) x = u(rng) < 0.3 ? grid(rng) / 3.0 : u(rng);
        const double got = spearman(a, b), want = oracle::spearman(a, b);
        require(std::fabs(got - want) <= 1e-9, "spearman trial " + std::to_string(trial) + ": " + fmt(got) + " vs " + fmt(want));
    }
    // Every estimated configuration over a 3-level grid, n <= 5; expected holds a unique best and worst.
    for (std::size_t n = 2; n <= 5; ++n) {
        std::vector<double> expected(n);
        for (std::size_t i = 0; i < n; ++i) expected[i] = static_cast<double>(n - 1 - i) / static_cast<double>(n - 1);
        std::size_t combos = 1;
        for (std::size_t i = 0; i < n; ++i) combos *= 3;
        for (std::size_t c = 0; c < combos; ++c) {
            std::vector<double> est(n);
            std::size_t x = c;
            for (std::size_t i = 0; i < n; ++i, x /= 3) est[i] = static_cast<double>(x % 3);
            require(std::fabs(top1(expected, est) - oracle::top1(expected, est)) <= 1e-12, "top1 n=" + std::to_string(n));
            require(std::fabs(bottom1(expected, est) - oracle::bottom1(expected, est)) <= 1e-12,
                    "bottom1 n=" + std::to_string(n));
        }
    }
    return std::nullopt;
}

std::optional<std::string> golden_end_to_end() {
    rbtest::TempDir t, e;
    auto r = rbtest::cli(rbtest::golden_transform_args(t.path()));
    require(r.code == 0, "transform exit " + std::to_string(r.code) + ": " + r.err);
    const auto got = load_ranked_benchmark(t / "ranked.jsonl");
    const auto want = load_ranked_benchmark(rbtest::fixture("golden/expected_ranked.jsonl"));
    require(got.size() == 5 && got.size() == want.size(), "ranked entry count");
    for (std::size_t i = 0; i < got.size(); ++i) {
        require(got[i].task_id == want[i].task_id && got[i].solutions.size() == want[i].solutions.size(),
                "entry " + want[i].task_id);
        for (std::size_t s = 0; s < got[i].solutions.size(); ++s) {
            const auto& g = got[i].solutions[s];
            const auto& w = want[i].solutions[s];
            require(g.code == w.code && g.score == w.score && g.rank == w.rank, want[i].task_id + " rank " + std::to_string(w.rank));
        }
    }
    r = rbtest::cli(rbtest::golden_evaluate_args(t / "ranked.jsonl", e.path()));
    require(r.code == 0, "evaluate exit " + std::to_string(r.code) + ": " + r.err);
    const auto rep = report_from_json(nlohmann::json::parse(rbtest::slurp(e / "report.json")));
    require(rep.top1 == 100.0 && rep.spearman == 1.0 && rep.bottom1 == 100.0 && rep.mae == 0.0,
            "report " + fmt(rep.top1) + "/" + fmt(rep.spearman) + "/" + fmt(rep.bottom1) + "/" + fmt(rep.mae));
    return std::nullopt;
}

std::optional<std::string> timeout_and_filter() {
    Sandbox sb(rbtest::exec_config(4, 3000));
    const auto t0 = std::chrono::steady_clock::now();
    const auto o = sb.execute_test("def f():\n    while True:\n        pass\n", "assert f() == 1");
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    require(o.status == ExecStatus::timeout, "loop classified " + std::string(to_string(o.status)));
    require(ms <= 3500.0, "timeout took " + fmt(ms) + " ms");

    Problem p;
    p.task_id = "filter";
    p.question = "f";
    p.predefined_tests = {"assert f(1) == 2", "assert f(2) == 3", "assert f(0) == 1"};
    auto syntax = score_solution("def f(x) return x + 1", p, sb, 0);
    auto wrong = score_solution("def f(x):\n    return [][0] if x == 1 else x\n", p, sb, 1);
    require(syntax.score == 0.0 && wrong.score == 0.0, "both candidates should score 0");
    const auto kept = filter_trivial_failures({syntax, wrong});
    require(kept.size() == 1 && kept[0].order == 1, "filter should keep only the assert-failing solution");
    return std::nullopt;
}

std::optional<std::string> saturation_coherence() {
    Sandbox sb(rbtest::exec_config(8));
    const auto entries = load_ranked_benchmark(rbtest::fixture("golden/expected_ranked.jsonl"));
    const auto problems = load_benchmark(rbtest::fixture("golden/benchmark.jsonl"), SourceSchema::generic);
    std::vector<OutcomeMatrix> ms;
    for (std::size_t i = 0; i < entries.size(); ++i) ms.push_back(build_outcome_matrix(entries[i], problems[i].predefined_tests, sb));
    SaturationParams params;
    params.reps = 1000;
    params.seed = 1;
    params.workers = 4;
    const auto rows = saturation_analysis(ms, params);
    require(rows.size() == 3, "expected rows for k = 1..3");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].rho_ci_low <= rows[i].rho_mean && rows[i].rho_mean <= rows[i].rho_ci_high,
                "CI does not bracket mean at k=" + std::to_string(rows[i].k));
        if (i > 0) require(rows[i].rho_mean + 0.01 >= rows[i - 1].rho_mean, "rho_mean decreases at k=" + std::to_string(rows[i].k));
    }
    require(rows.back().rho_mean == 1.0 && rows.back().rho_std == 0.0,
            "full-count row " + fmt(rows.back().rho_mean) + " / " + fmt(rows.back().rho_std));
    return std::nullopt;
}

std::optional<std::string> determinism() {
    const auto script = rbtest::fixture("golden/client_script.json").string();
    const auto ranked_src = rbtest::fixture("golden/expected_ranked.jsonl").string();
    auto twice = [](const std::function<std::vector<std::string>(const fs::path&)>& args,
                    const std::vector<std::string>& files, const std::string& label) {
        rbtest::TempDir a, b;
        for (auto* d : {&a, &b}) {
            const auto r = rbtest::cli(args(d->path()));
            require(r.code == 0, label + " exit " + std::to_string(r.code) + ": " + r.err);
        }
        for (const auto& f : files) require(rbtest::slurp(a / f) == rbtest::slurp(b / f), label + ": " + f + " differs");
    };
    twice([](const fs::path& d) { return rbtest::golden_transform_args(d); }, {"ranked.jsonl", "deficits.jsonl", "stats.json"},
          "transform");
    twice([&](const fs::path& d) { return rbtest::golden_evaluate_args(ranked_src, d); },
          {"estimates.jsonl", "report.json", "report.txt"}, "evaluate reference");
    twice(
        [&](const fs::path& d) {
            return std::vector<std::string>{"--seed", "7", "--quiet", "--out", d.string(), "evaluate", "--input", ranked_src,
                                            "--client-script", script, "--no-timings"};
        },
        {"suites.jsonl", "estimates.jsonl", "report.json", "report.txt"}, "evaluate generated");
    twice(
        [&](const fs::path& d) {
            return std::vector<std::string>{"--seed", "7", "--quiet", "--out", d.string(), "evaluate", "--input", ranked_src,
                                            "--verifier", "reward_model", "--client-script", script};
        },
        {"estimates.jsonl", "report.json", "report.txt"}, "evaluate reward");
    twice(
        [&](const fs::path& d) {
            return std::vector<std::string>{"--seed", "7", "--quiet", "--out", d.string(), "sweep", "--input", ranked_src,
                                            "--client-script", script, "--counts", "5,10", "--no-timings"};
        },
        {"sweep.csv", "sweep.json", "report.txt"}, "sweep");
    twice(
        [&](const fs::path& d) {
            return std::vector<std::string>{"--seed", "7", "--quiet", "--out", d.string(), "saturate", "--input", ranked_src,
                                            "--source", rbtest::fixture("golden/benchmark.jsonl").string(), "--reps", "1"};
        },
        {"outcome_matrices.jsonl", "saturation.csv", "saturation.json"}, "saturate");
    twice(
        [&](const fs::path& d) {
            return std::vector<std::string>{"--quiet", "--out", d.string(), "analyze", "--input", ranked_src};
        },
        {"hist_score_distribution.json", "hist_score_range.csv", "stats.json"}, "analyze");
    return std::nullopt;
}

std::string rounded(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::optional<std::string> released_stats() {
    const char* dir = std::getenv("RANKBENCH_RELEASED_DIR");
    if (!dir || !*dir) return "RANKBENCH_RELEASED_DIR not set";
    struct Row {
        const char* file;
        std::size_t problems;
        const char* avg_tests;
        std::size_t solutions;
        const char* avg_score;
    };
    const Row rows[] = {{"humaneval_rank_plus.jsonl", 164, "764.1", 820, "0.50"}, {"mbpp_rank.jsonl", 974, "3.0", 3249, "0.50"}};
    int checked = 0;
    for (const auto& row : rows) {
        const fs::path p = fs::path(dir) / row.file;
        if (!fs::exists(p)) continue;
        const auto s = compute_stats(load_ranked_benchmark(p));
        const std::string got = std::to_string(s.problem_count) + "/" + rounded(s.avg_tests, 1) + "/" +
                                std::to_string(s.solution_count) + "/" + rounded(s.avg_solution_score, 2);
        const std::string want = std::to_string(row.problems) + "/" + row.avg_tests + "/" + std::to_string(row.solutions) +
                                 "/" + row.avg_score;
        require(got == want, std::string(row.file) + ": " + got + " vs " + want);
        ++checked;
    }
    if (checked == 0) return "no released benchmark files in RANKBENCH_RELEASED_DIR";
    return std::nullopt;
}

}  // namespace

int main() {
    criterion("selection quantiles on 200 randomized pools", 1.0, selection_quantiles);
    criterion("selection math table", 0, selection_math);
    criterion("metrics oracle equivalence", 10.0, metrics_oracle);
    criterion("end-to-end golden transform and evaluate", 60.0, golden_end_to_end);
    criterion("timeout classification and trivial-failure filter", 0, timeout_and_filter);
    criterion("saturation coherence on golden set", 30.0, saturation_coherence);
    criterion("determinism of command outputs", 0, determinism);
    criterion("released benchmark statistics", 0, released_stats);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
    return failures == 0 ? 0 : 1;
}
