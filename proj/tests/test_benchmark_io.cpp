#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "rankbench/benchmark_io.hpp"
#include "rankbench/errors.hpp"
#include "test_support.hpp"

using namespace rankbench;
using rbtest::fixture;
using rbtest::TempDir;

namespace {

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines) {
    std::ofstream out(p);
    for (const auto& l : lines) out << l << '\n';
}

RankedEntry make_entry(const std::string& id, std::vector<double> scores) {
    RankedEntry e{id, "question for " + id, {}, 3};
    int rank = 1;
    for (double s : scores) e.solutions.push_back({"def f():\n    return " + std::to_string(rank) + "\n", s, rank++, 0.5 * rank});
    return e;
}

std::size_t count_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST(LoadBenchmark, GenericGoldenFixture) {
    const auto problems = load_benchmark(fixture("golden/benchmark.jsonl"), SourceSchema::generic);
    ASSERT_EQ(problems.size(), 5u);
    EXPECT_EQ(problems[0].task_id, "golden/add");
    EXPECT_EQ(problems[0].predefined_tests.size(), 3u);
    EXPECT_FALSE(problems[0].canonical_solution.has_value());
}

TEST(LoadBenchmark, EmptyFileGivesEmptyList) {
    TempDir dir;
    write_lines(dir / "empty.jsonl", {});
    EXPECT_TRUE(load_benchmark(dir / "empty.jsonl", SourceSchema::generic).empty());
}

TEST(LoadBenchmark, MissingTaskIdReportsLine) {
    TempDir dir;
    write_lines(dir / "b.jsonl", {R"({"task_id":"a","question":"q","predefined_tests":["assert 1"]})", "",
                                  R"({"question":"q","predefined_tests":["assert 1"]})"});
    try {
        load_benchmark(dir / "b.jsonl", SourceSchema::generic);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("task_id"), std::string::npos);
    }
}

TEST(LoadBenchmark, MalformedJsonReportsLine) {
    TempDir dir;
    write_lines(dir / "b.jsonl", {R"({"task_id":"a","question":"q","predefined_tests":[]})", "{not json"});
    try {
        load_benchmark(dir / "b.jsonl", SourceSchema::generic);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(LoadBenchmark, DuplicateTaskIdRejected) {
    TempDir dir;
    const std::string row = R"({"task_id":"a","question":"q","predefined_tests":["assert 1"]})";
    write_lines(dir / "b.jsonl", {row, row});
    EXPECT_THROW(load_benchmark(dir / "b.jsonl", SourceSchema::generic), ValidationError);
}

TEST(LoadBenchmark, MissingFileIsConfigError) {
    EXPECT_THROW(load_benchmark("/nonexistent/bench.jsonl", SourceSchema::generic), ConfigError);
}

TEST(LoadBenchmark, MbppMapping) {
    const auto problems = load_benchmark(fixture("mbpp_sample.jsonl"), SourceSchema::mbpp);
    ASSERT_EQ(problems.size(), 2u);
    EXPECT_EQ(problems[0].task_id, "11");
    EXPECT_EQ(problems[0].predefined_tests.size(), 3u);
    // The first test is appended so the expected signature is visible.
    EXPECT_NE(problems[0].question.find("assert remove_Occ(\"hello\""), std::string::npos);
    ASSERT_TRUE(problems[0].canonical_solution.has_value());
    // Setup code is prepended to every test.
    EXPECT_EQ(problems[1].predefined_tests[0].rfind("import math\n", 0), 0u);
}

TEST(LoadBenchmark, HumanEvalMapping) {
    const auto problems = load_benchmark(fixture("humaneval_sample.jsonl"), SourceSchema::humaneval);
    ASSERT_EQ(problems.size(), 2u);
    const auto& p = problems[0];
    EXPECT_EQ(p.entry_point.value(), "add");
    ASSERT_EQ(p.predefined_tests.size(), 3u);
    EXPECT_EQ(p.predefined_tests[0], "assert add(1, 2) == 3");
    EXPECT_NE(p.predefined_tests[2].find("add("), std::string::npos);
    EXPECT_EQ(p.canonical_solution.value(), p.question + "    return a + b\n");
    // A check() with a loop cannot be split and stays whole.
    ASSERT_EQ(problems[1].predefined_tests.size(), 1u);
    EXPECT_NE(problems[1].predefined_tests[0].find("check(double)"), std::string::npos);
}

TEST(ProblemJson, RoundTrip) {
    Problem p{"x", "q", std::string("def f(): pass"), {"assert f() is None"}, std::string("f")};
    EXPECT_EQ(problem_from_json(problem_to_json(p), SourceSchema::generic), p);
}

TEST(RankedBenchmark, OneEntryRoundTrip) {
    TempDir dir;
    const std::vector<RankedEntry> entries{make_entry("t1", {1.0, 0.75, 0.5, 0.25, 0.0})};
    write_ranked_benchmark(entries, dir / "r.jsonl");
    EXPECT_EQ(count_lines(dir / "r.jsonl"), 1u);
    EXPECT_EQ(load_ranked_benchmark(dir / "r.jsonl"), entries);
}

TEST(RankedBenchmark, ManyEntriesOneLineEach) {
    TempDir dir;
    std::vector<RankedEntry> entries;
    for (int i = 0; i < 378; ++i) entries.push_back(make_entry("t" + std::to_string(i), {1.0, 0.5, 0.0}));
    write_ranked_benchmark(entries, dir / "r.jsonl");
    EXPECT_EQ(count_lines(dir / "r.jsonl"), 378u);
}

TEST(RankedBenchmark, DuplicateScoresRefusedWithTaskId) {
    TempDir dir;
    const std::vector<RankedEntry> entries{make_entry("ok", {1.0, 0.0}), make_entry("dup", {1.0, 0.5, 0.5})};
    try {
        write_ranked_benchmark(entries, dir / "r.jsonl");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("dup"), std::string::npos);
    }
    EXPECT_FALSE(std::filesystem::exists(dir / "r.jsonl"));
}

TEST(RankedBenchmark, LoadRejectsFirstScoreBelowOne) {
    TempDir dir;
    auto bad = ranked_entry_to_json(make_entry("t", {0.9, 0.0}));
    write_lines(dir / "r.jsonl", {bad.dump()});
    EXPECT_THROW(load_ranked_benchmark(dir / "r.jsonl"), ValidationError);
}

TEST(RankedBenchmark, LoadRejectsUnsortedSolutions) {
    TempDir dir;
    auto e = make_entry("t", {1.0, 0.2, 0.6});
    write_lines(dir / "r.jsonl", {ranked_entry_to_json(e).dump()});
    EXPECT_THROW(load_ranked_benchmark(dir / "r.jsonl"), ValidationError);
}

TEST(RankedBenchmark, ValidateRejectsOtherBreaks) {
    auto e = make_entry("t", {1.0, 0.5});
    e.solutions[1].rank = 3;
    EXPECT_THROW(validate_ranked_entry(e), ValidationError);
    EXPECT_THROW(validate_ranked_entry(make_entry("t", {1.0})), ValidationError);
    auto no_tests = make_entry("t", {1.0, 0.0});
    no_tests.test_count = 0;
    EXPECT_THROW(validate_ranked_entry(no_tests), ValidationError);
    EXPECT_THROW(validate_ranked_entry(make_entry("t", {1.0, 0.75, 0.5}), 2), ValidationError);
    EXPECT_NO_THROW(validate_ranked_entry(make_entry("t", {1.0, 0.75, 0.5}), 3));
}

TEST(RankedBenchmark, RandomRoundTripIsIdentity) {
    std::mt19937 rng(7);
    TempDir dir;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<RankedEntry> entries;
        const int n_entries = 1 + static_cast<int>(rng() % 5);
        for (int i = 0; i < n_entries; ++i) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::vector<double> scores{1.0};
            const int extra = 1 + static_cast<int>(rng() % 4);
            std::vector<double> rest;
            for (int j = 0; j < extra; ++j) rest.push_back(u(rng));
            std::sort(rest.rbegin(), rest.rend());
            rest.erase(std::unique(rest.begin(), rest.end()), rest.end());
            scores.insert(scores.end(), rest.begin(), rest.end());
            auto e = make_entry("t" + std::to_string(i), scores);
            e.solutions[0].code = "print(\"\\u00e9\\t\\n\")";
            e.solutions[0].mean_exec_ms = u(rng) * 100;
            entries.push_back(e);
        }
        write_ranked_benchmark(entries, dir / "r.jsonl");
        ASSERT_EQ(load_ranked_benchmark(dir / "r.jsonl"), entries);
    }
}

TEST(Stats, TwoScoresAverageHalf) {
    const std::vector<RankedEntry> entries{make_entry("t", {1.0, 0.0})};
    const auto s = compute_stats(entries);
    EXPECT_EQ(s.problem_count, 1u);
    EXPECT_EQ(s.solution_count, 2u);
    EXPECT_DOUBLE_EQ(s.avg_solution_score, 0.5);
    EXPECT_DOUBLE_EQ(s.avg_tests, 3.0);
}

TEST(Stats, EmptyInputRejected) {
    EXPECT_THROW(compute_stats(std::span<const RankedEntry>{}), std::invalid_argument);
    EXPECT_THROW(compute_stats(std::span<const Problem>{}, {}), std::invalid_argument);
}

TEST(Stats, SourceSideCountsTests) {
    const auto problems = load_benchmark(fixture("golden/benchmark.jsonl"), SourceSchema::generic);
    const std::vector<std::vector<double>> scores(5, {1.0, 0.0});
    const auto s = compute_stats(problems, scores);
    EXPECT_EQ(s.problem_count, 5u);
    EXPECT_DOUBLE_EQ(s.avg_tests, 3.0);
    EXPECT_EQ(s.solution_count, 10u);
    EXPECT_DOUBLE_EQ(s.avg_solution_score, 0.5);
}
