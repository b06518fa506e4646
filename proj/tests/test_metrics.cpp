#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rankbench/metrics.hpp"

using namespace rankbench;
using V = std::vector<double>;

TEST(Top1, Examples) {
    EXPECT_EQ(top1(V{1.0, 0.75, 0.5, 0.25, 0.0}, V{0.9, 0.8, 0.5, 0.2, 0.1}), 1.0);
    EXPECT_EQ(top1(V{1.0, 0.75, 0.5, 0.25, 0.0}, V{0.1, 0.2, 0.9, 0.3, 0.0}), 0.0);
    EXPECT_EQ(top1(V{1.0, 0.5, 0.0}, V{0.8, 0.8, 0.1}), 0.5);
    EXPECT_THROW(top1(V{1.0, 0.5}, V{1.0}), std::invalid_argument);
    EXPECT_THROW(top1(V{1.0}, V{1.0}), std::invalid_argument);
}

TEST(Bottom1, Examples) {
    EXPECT_EQ(bottom1(V{1.0, 0.5, 0.0}, V{0.9, 0.4, 0.1}), 1.0);
    EXPECT_EQ(bottom1(V{1.0, 0.5, 0.0}, V{0.0, 0.4, 0.1}), 0.0);
    EXPECT_DOUBLE_EQ(bottom1(V{1.0, 0.6, 0.3, 0.0}, V{0.9, 0.2, 0.2, 0.2}), 1.0 / 3.0);
    EXPECT_THROW(bottom1(V{1.0, 0.5}, V{1.0, 0.2, 0.1}), std::invalid_argument);
}

TEST(Spearman, Examples) {
    EXPECT_DOUBLE_EQ(spearman(V{1.0, 0.5, 0.0}, V{0.9, 0.4, 0.1}), 1.0);
    EXPECT_DOUBLE_EQ(spearman(V{1.0, 0.5, 0.0}, V{0.1, 0.4, 0.9}), -1.0);
    const V e{1.0, 0.5, 0.5, 0.0}, s{0.9, 0.7, 0.4, 0.1};
    EXPECT_NEAR(spearman(e, s), oracle::spearman(e, s), 1e-12);
    EXPECT_NEAR(spearman(e, s), 0.9487, 5e-5);
    EXPECT_EQ(spearman(V{1.0, 0.0}, V{0.5, 0.5}), 0.0);
    EXPECT_THROW(spearman(V{1.0, 0.5}, V{1.0}), std::invalid_argument);
}

TEST(AverageRanks, Ties) {
    EXPECT_EQ(average_ranks(V{1.0, 0.5, 0.5, 0.0}), (V{4.0, 2.5, 2.5, 1.0}));
    EXPECT_EQ(average_ranks(V{2.0, 2.0, 2.0}), (V{2.0, 2.0, 2.0}));
}

TEST(Mae, Examples) {
    EXPECT_NEAR(mae(V{1.0, 0.5, 0.0}, V{0.9, 0.7, 0.1}), 0.4 / 3.0, 1e-12);
    EXPECT_EQ(mae(V{0.3, 0.7}, V{0.3, 0.7}), 0.0);
    EXPECT_EQ(mae(V{1.0, 0.0}, V{0.5, 0.5}), 0.5);
    EXPECT_THROW(mae(V{1.0}, V{}), std::invalid_argument);
}

namespace {

V random_vector(std::mt19937_64& rng, std::size_t n) {
    // Draw from a small grid so ties are common.
    std::uniform_int_distribution<int> grid(0, 4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    V v(n);
    for (auto& x : v) x = u(rng) < 0.3 ? grid(rng) / 4.0 : u(rng);
    return v;
}

}  // namespace

TEST(Properties, RandomVectors) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + trial % 7;
        const V a = random_vector(rng, n), b = random_vector(rng, n);
        EXPECT_NEAR(spearman(a, b), spearman(b, a), 1e-12);
        EXPECT_NEAR(spearman(a, b), oracle::spearman(a, b), 1e-9);
        V a3(a);
        for (auto& x : a3) x = x * x * x + 2.0;
        EXPECT_NEAR(spearman(a3, b), spearman(a, b), 1e-12);

        const double t = top1(a, b), bt = bottom1(a, b);
        EXPECT_GE(t, 0.0);
        EXPECT_LE(t, 1.0);
        EXPECT_GE(bt, 0.0);
        EXPECT_LE(bt, 1.0);
        EXPECT_GE(mae(a, b), 0.0);

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        V pa(n), pb(n);
        for (std::size_t i = 0; i < n; ++i) {
            pa[i] = a[perm[i]];
            pb[i] = b[perm[i]];
        }
        EXPECT_NEAR(mae(pa, pb), mae(a, b), 1e-12);
    }
}

TEST(Properties, SelfCorrelation) {
    EXPECT_DOUBLE_EQ(spearman(V{0.1, 0.9, 0.4, 0.4}, V{0.1, 0.9, 0.4, 0.4}), 1.0);
    const V e{1.0, 0.75, 0.5, 0.25, 0.0};
    EXPECT_EQ(top1(e, e), 1.0);
    EXPECT_EQ(bottom1(e, e), 1.0);
}

TEST(Oracle, ExhaustiveTieConfigurations) {
    // Every estimated vector over a 3-level grid for n <= 5, against a strict expected ordering.
    for (std::size_t n = 2; n <= 5; ++n) {
        V expected(n);
        for (std::size_t i = 0; i < n; ++i) expected[i] = 1.0 - static_cast<double>(i) / static_cast<double>(n - 1);
        std::size_t combos = 1;
        for (std::size_t i = 0; i < n; ++i) combos *= 3;
        for (std::size_t c = 0; c < combos; ++c) {
            V est(n);
            std::size_t x = c;
            for (std::size_t i = 0; i < n; ++i, x /= 3) est[i] = static_cast<double>(x % 3) / 2.0;
            EXPECT_NEAR(top1(expected, est), oracle::top1(expected, est), 1e-12);
            EXPECT_NEAR(bottom1(expected, est), oracle::bottom1(expected, est), 1e-12);
        }
    }
}

namespace {

VerifierEstimate make_estimate(const std::string& id, const V& exp, const std::vector<std::optional<double>>& est) {
    VerifierEstimate e{id, VerifierKind::generated_tests, {}};
    for (std::size_t i = 0; i < exp.size(); ++i) e.per_solution.push_back({static_cast<int>(i + 1), exp[i], est[i], {}, {}});
    return e;
}

}  // namespace

TEST(Aggregate, MeansAcrossProblems) {
    const std::vector<VerifierEstimate> ests{
        make_estimate("a", {1.0, 0.5, 0.0}, {0.9, 0.5, 0.1}),
        make_estimate("b", {1.0, 0.5, 0.0}, {0.1, 0.5, 0.9}),
        make_estimate("c", {1.0, 0.0}, {std::nullopt, 0.3}),
    };
    const auto r = aggregate(ests);
    EXPECT_EQ(r.top1, 50.0);
    EXPECT_EQ(r.bottom1, 50.0);
    EXPECT_NEAR(r.spearman, 0.0, 1e-12);
    EXPECT_EQ(r.n_problems, 2u);
    EXPECT_EQ(r.n_excluded, 1u);
    EXPECT_EQ(r.verifier_kind, "generated_tests");
    EXPECT_NEAR(r.mae, (0.2 / 3.0 + 1.8 / 3.0) / 2.0, 1e-12);
    EXPECT_THROW(aggregate(std::vector<VerifierEstimate>{}), std::invalid_argument);
}

TEST(Aggregate, PooledMae) {
    const std::vector<VerifierEstimate> ests{
        make_estimate("a", {1.0, 0.0}, {1.0, 0.0}),
        make_estimate("b", {1.0, 0.5, 0.0, 0.0}, {0.0, 0.5, 0.0, 0.0}),
    };
    EXPECT_NEAR(aggregate(ests, MaeMode::per_problem).mae, 0.125, 1e-12);
    EXPECT_NEAR(aggregate(ests, MaeMode::pooled).mae, 1.0 / 6.0, 1e-12);
}

TEST(Report, JsonAndTable) {
    MetricsReport r{88.2, 70.0, 0.81234, 0.18, 164, 0, "reward_model"};
    const auto back = report_from_json(report_to_json(r));
    EXPECT_EQ(report_to_json(back), report_to_json(r));
    const std::vector<std::pair<std::string, MetricsReport>> rows{{"ref", r}};
    const auto table = format_table(rows);
    const auto t = table.find("Top-1"), s = table.find("Spearman"), b = table.find("Bottom-1"), m = table.find("MAE");
    ASSERT_NE(t, std::string::npos);
    EXPECT_LT(t, s);
    EXPECT_LT(s, b);
    EXPECT_LT(b, m);
    EXPECT_NE(table.find("88.2"), std::string::npos);
    EXPECT_NE(table.find("0.81"), std::string::npos);
    EXPECT_NE(table.find("0.18"), std::string::npos);
}

TEST(ProblemMetrics, Json) {
    const auto pm = problem_metrics(make_estimate("a", {1.0, 0.5, 0.0}, {0.9, 0.7, 0.1}));
    EXPECT_EQ(pm.task_id, "a");
    EXPECT_EQ(pm.n_solutions, 3u);
    EXPECT_EQ(pm.top1, 1.0);
    EXPECT_EQ(problem_metrics_to_json(pm).at("task_id"), "a");
}
