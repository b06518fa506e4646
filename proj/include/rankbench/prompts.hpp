#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace rankbench {

struct PromptTemplate {
    std::string name;
    std::string body;  // placeholders: {question}, {solution}, {count}
};

/// Substitutes each `{key}` occurrence in one left-to-right pass; substituted
/// text is never rescanned. Unknown braces are left alone.
std::string substitute(std::string_view body, const std::map<std::string, std::string, std::less<>>& values);

bool has_placeholder(std::string_view body, std::string_view key);

PromptTemplate load_template(const std::filesystem::path& path, std::string name = {});

namespace prompts {

// Solution generation (one correct, one deliberately flawed).
const PromptTemplate& correct_solution();
const PromptTemplate& incorrect_solution();

// Assertion-suite generation; {count} is the number of requested cases.
const PromptTemplate& testgen_without_solution();
const PromptTemplate& testgen_with_solution();

// Reward-model turns: user turn carries the preamble and question, the
// assistant turn carries the candidate solution.
const PromptTemplate& reward_user();
const PromptTemplate& reward_assistant();

/// Looks up a built-in template by name ("correct", "incorrect",
/// "testgen", "testgen_with_solution", "reward_user", "reward_assistant").
const PromptTemplate& builtin(std::string_view name);

}  // namespace prompts
}  // namespace rankbench
