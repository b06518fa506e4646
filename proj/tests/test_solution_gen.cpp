#include <gtest/gtest.h>

#include <mutex>
#include <set>

#include "rankbench/errors.hpp"
#include "rankbench/prompts.hpp"
#include "rankbench/solution_gen.hpp"

using namespace rankbench;

namespace {

Problem problem() { return Problem{"p1", "Write add(a, b).", std::nullopt, {"assert add(1, 2) == 3"}, std::nullopt}; }

GenerationConfig small_config(int prompts_n, int seeds_n, int rounds) {
    GenerationConfig c;
    c.prompts.resize(static_cast<std::size_t>(prompts_n), prompts::correct_solution());
    if (prompts_n >= 2) c.prompts[1] = prompts::incorrect_solution();
    c.seeds.clear();
    for (int s = 0; s < seeds_n; ++s) c.seeds.push_back(s + 1);
    c.rounds = rounds;
    c.retry.max_retries = 0;
    c.retry.initial_backoff = std::chrono::milliseconds(1);
    return c;
}

}  // namespace

TEST(RenderPrompt, QuestionInlined) {
    const auto text = render_prompt(prompts::correct_solution(), "QUESTION-TEXT {count}");
    EXPECT_NE(text.find("QUESTION-TEXT {count}"), std::string::npos);
    EXPECT_EQ(text.find("{question}"), std::string::npos);
}

TEST(RenderPrompt, IncorrectTemplateHasSuggestions) {
    const auto text = render_prompt(prompts::incorrect_solution(), "Q");
    EXPECT_NE(text.find("Do not handle negative numbers"), std::string::npos);
    EXPECT_NE(text.find("Ignore the last element in a list"), std::string::npos);
}

TEST(RenderPrompt, PlaceholderErrors) {
    EXPECT_THROW(render_prompt(PromptTemplate{"bad", "no placeholder"}, "Q"), ValidationError);
    EXPECT_THROW(render_prompt(prompts::correct_solution(), "Q", std::string("code")), ValidationError);
    EXPECT_THROW(render_prompt(prompts::testgen_with_solution(), "Q"), ValidationError);
}

TEST(Substitute, SinglePassNoRescan) {
    EXPECT_EQ(substitute("{a}-{b}-{c}", {{"a", "{b}"}, {"b", "B"}}), "{b}-B-{c}");
}

TEST(ExtractCode, LabeledBlock) {
    EXPECT_EQ(extract_code("Sure!\n```python\ndef f():\n    return 1\n```\nDone.").value(), "def f():\n    return 1\n");
}

TEST(ExtractCode, ProseOnly) { EXPECT_FALSE(extract_code("I would write a loop.").has_value()); }

TEST(ExtractCode, TwoBlocksTakesFirst) {
    EXPECT_EQ(extract_code("```python\nA = 1\n```\n```python\nB = 2\n```").value(), "A = 1\n");
}

TEST(ExtractCode, EnumeratedMultiBlockShapes) {
    // Labels: P python, U unlabeled, O other language. A labeled python block
    // wins; otherwise the first unlabeled one; other languages never count.
    const std::vector<std::pair<std::string, char>> fences{{"python", 'P'}, {"", 'U'}, {"js", 'O'}};
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) {
            for (std::size_t c = 0; c < 3; ++c) {
                const std::size_t picks[3] = {a, b, c};
                std::string text = "intro\n";
                for (int i = 0; i < 3; ++i) {
                    text += "```" + fences[picks[i]].first + "\nBLOCK" + std::to_string(i) + "\n```\ntext\n";
                }
                std::optional<std::string> want;
                for (int i = 0; i < 3 && !want; ++i)
                    if (fences[picks[i]].second == 'P') want = "BLOCK" + std::to_string(i) + "\n";
                for (int i = 0; i < 3 && !want; ++i)
                    if (fences[picks[i]].second == 'U') want = "BLOCK" + std::to_string(i) + "\n";
                EXPECT_EQ(extract_code(text), want) << text;
            }
        }
    }
}

TEST(ExtractCode, EdgeCases) {
    EXPECT_FALSE(extract_code("```python\n   \n```").has_value());
    EXPECT_FALSE(extract_code("```python\nx = 1\n").has_value());
    EXPECT_EQ(extract_code("```py\nx = 1\n```").value(), "x = 1\n");
    EXPECT_EQ(extract_code("```Python3\nx = 1\n```").value_or("none"), "x = 1\n");
}

TEST(Generate, TwoPromptsOneSeedOneRound) {
    ScriptedChatClient client([](const ChatRequest& r) -> ChatResponse {
        return {"```python\nx = " + std::to_string(r.tag.sample_index) + "\n```", {}};
    });
    const auto out = generate_solutions(problem(), client, small_config(2, 1, 1));
    ASSERT_EQ(out.candidates.size(), 2u);
    EXPECT_EQ(out.candidates[0], "x = 0\n");
    EXPECT_EQ(out.candidates[1], "x = 1\n");
    EXPECT_EQ(out.records[0].prompt, "correct");
    EXPECT_EQ(out.records[1].prompt, "incorrect");
}

TEST(Generate, ProseResponsesDropped) {
    ScriptedChatClient client([](const ChatRequest&) -> ChatResponse { return {"no code here", {}}; });
    const auto out = generate_solutions(problem(), client, small_config(2, 1, 1));
    EXPECT_TRUE(out.candidates.empty());
    ASSERT_EQ(out.records.size(), 2u);
    EXPECT_FALSE(out.records[0].extracted);
    EXPECT_EQ(out.records[0].response.value(), "no code here");
}

TEST(Generate, CallCountAndSeedSchedule) {
    std::mutex mu;
    std::set<std::pair<std::string, long long>> seen;
    ScriptedChatClient client([&](const ChatRequest& r) -> ChatResponse {
        std::lock_guard lock(mu);
        seen.insert({r.messages.front().content.substr(0, 40), r.seed.value()});
        EXPECT_DOUBLE_EQ(r.temperature, 1.0);
        return {"```python\npass\n```", {}};
    });
    auto cfg = small_config(2, 3, 2);
    const auto out = generate_solutions(problem(), client, cfg);
    EXPECT_LE(out.candidates.size(), 12u);
    EXPECT_EQ(client.calls(), 12);
    EXPECT_EQ(seen.size(), 12u);  // every (prompt, seed, round) request is distinct
}

TEST(Generate, IterationOffsetsSampleIndex) {
    ScriptedChatClient client([](const ChatRequest&) -> ChatResponse { return {"```python\npass\n```", {}}; });
    const auto out = generate_solutions(problem(), client, small_config(2, 2, 1), 2);
    EXPECT_EQ(out.records.front().sample_index, 8);
    EXPECT_EQ(out.records.front().round, 2);
}

TEST(Generate, TransportFailureRecordedNotThrown) {
    ScriptedChatClient client([](const ChatRequest& r) -> ChatResponse {
        if (r.tag.sample_index == 0) throw TransportError("down");
        return {"```python\npass\n```", {}};
    });
    auto cfg = small_config(2, 1, 1);
    cfg.retry.max_retries = 1;
    const auto out = generate_solutions(problem(), client, cfg);
    EXPECT_EQ(out.candidates.size(), 1u);
    EXPECT_TRUE(out.records[0].error.has_value());
    EXPECT_EQ(out.records[0].attempts, 2);
    EXPECT_EQ(client.calls(), 3);
}

TEST(Generate, ConfigValidation) {
    auto cfg = small_config(1, 1, 1);
    cfg.seeds.clear();
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = small_config(1, 1, 1);
    cfg.top_p = 0.0;
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = small_config(1, 1, 1);
    cfg.prompts = {PromptTemplate{"x", "nothing"}};
    EXPECT_THROW(validate(cfg), ConfigError);
}
