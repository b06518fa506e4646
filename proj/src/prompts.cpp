#include "rankbench/prompts.hpp"

#include <array>

#include "rankbench/benchmark_io.hpp"
#include "rankbench/errors.hpp"

namespace rankbench {

std::string substitute(std::string_view body, const std::map<std::string, std::string, std::less<>>& values) {
    std::string out;
    out.reserve(body.size());
    std::size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '{') {
            const auto close = body.find('}', i + 1);
            if (close != std::string_view::npos) {
                if (auto it = values.find(body.substr(i + 1, close - i - 1)); it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(body[i++]);
    }
    return out;
}

bool has_placeholder(std::string_view body, std::string_view key) {
    return body.find("{" + std::string(key) + "}") != std::string_view::npos;
}

PromptTemplate load_template(const std::filesystem::path& path, std::string name) {
    return PromptTemplate{name.empty() ? path.stem().string() : std::move(name), read_text(path)};
}

namespace prompts {

const PromptTemplate& correct_solution() {
    static const PromptTemplate t{"correct", R"PROMPT(Using only Python code, write a solution to the given coding problem.

Here are other guidelines for completing this task:

1. Enclose the code in a python code block ```python.
2. Do not include any unit tests in your answer, only generate the function.
3. The code must still compile, the only errors in the code should be logical.
4. Include any necessary imports with your code, only import libraries included in the standard library.

Question:
{question}

Answer:
)PROMPT"};
    return t;
}

const PromptTemplate& incorrect_solution() {
    static const PromptTemplate t{"incorrect", R"PROMPT(Using only Python code, write a somewhat incorrect solution to the given coding problem.

Do not provide any hints as to what is the mistake. Here are other guidelines for completing this task:

1. Enclose the code in a python code block ```python.
2. Do not include any unit tests in your answer, only generate the function.
3. The code must still compile, the only errors in the code should be logical.
4. Include any necessary imports with your code, only import libraries included in the standard library.
5. Do not add any hints as to the error you made.

Here are some suggestions:
- Do not handle negative numbers
- Do not handle duplicate values
- Introduce rounding errors
- Ignore the last element in a list
- Only handle specific values
- Only works for certain ranges of values or lengths

Question:
{question}

Answer:
)PROMPT"};
    return t;
}

namespace {

constexpr std::string_view kExampleQuestion = R"PROMPT(from typing import Optional
def first_repeated_char(s: str) -> Optional[str]:
    """ 
    Find the first repeated character in a given string.
    >>> first_repeated_char("abbac")
    'a'
    """
)PROMPT";

constexpr std::string_view kExampleTests = R"PROMPT(<assertion>assert first_repeated_char("!@#$%^&*!") == "!"</assertion>
<assertion>assert first_repeated_char("abcdedcba") == "d"</assertion>
<assertion>assert first_repeated_char("") == "None"</assertion>
<assertion>assert first_repeated_char("aaaa") == "a"</assertion>
<assertion>assert first_repeated_char("a") == "None"</assertion>
)PROMPT";

constexpr std::string_view kExampleSolution = R"PROMPT(from typing import Optional
def first_repeated_char(s: str) -> Optional[str]:
    """ 
    Find the first repeated character in a given string.
    >>> first_repeated_char("abbac")
    'a'
    """
    for index, c in enumerate(s):
        if s[:index + 1].count(c) > 1:
            return c
    return None
)PROMPT";

constexpr std::string_view kGuidelines = R"PROMPT(Here are guidelines for writing the assertion test cases:

1. You must wrap each assertion test case with tags <assertion> and </assertion>.
2. Do not start the assert with any indents or spaces.
3. You must not import any unit testing libraries for the assertions such as "unittest" or "pytest".
4. Each assertion must be complete and immediately executable. Assume the code solution is provided, do not repeat it.
5. Avoid unnecessary string literals, incorrect escaping, wrapping in "```python" or other redundancies.
6. Remember, it is your responsibility to carefully read the question and generate test cases that will evaluate the correctness of the solution.
)PROMPT";

}  // namespace

const PromptTemplate& testgen_without_solution() {
    static const PromptTemplate t{
        "testgen",
        std::string("You are an expert at writing assertion test cases and below is a question with function "
                    "signature and test cases. You must generate {count} assert test cases that will be used to "
                    "evaluate the code solution's correctness. You must adhere to the provided function signature "
                    "and test case format. Here are some examples that you should use as a reference:\n\n"
                    "Question:\n") +
            std::string(kExampleQuestion) + "\nTest Cases:\n" + std::string(kExampleTests) + "\n" +
            std::string(kGuidelines) +
            "\nHere is the question you must provide assertion test cases for:\n\n"
            "Question: {question}\n\nTest Cases:\n"};
    return t;
}

const PromptTemplate& testgen_with_solution() {
    static const PromptTemplate t{
        "testgen_with_solution",
        std::string("You are an expert at writing assertion test cases and below is a question with function "
                    "signature and completed code solution. You must generate {count} assert statements that will "
                    "be used to evaluate the code solution's correctness which may or may not be correct. Here are "
                    "some examples that you should use as a reference:\n\n"
                    "Question:\n") +
            std::string(kExampleQuestion) + "\nSolution:\n" + std::string(kExampleSolution) + "\nTest Cases:\n" +
            std::string(kExampleTests) + "\n" + std::string(kGuidelines) +
            "\nHere is the question and code solution you must provide assertion test cases for:\n\n"
            "Question: {question}\n\nSolution: {solution}\n\nTest Cases:\n"};
    return t;
}

const PromptTemplate& reward_user() {
    static const PromptTemplate t{"reward_user", R"PROMPT(You are given a coding problem for which you need to generate/complete a solution that is as accurate as possible.

Please complete the function with the Python programming language.

This is the problem you must solve: {question})PROMPT"};
    return t;
}

const PromptTemplate& reward_assistant() {
    static const PromptTemplate t{"reward_assistant", "Here is the solution to the given problem: {solution}"};
    return t;
}

const PromptTemplate& builtin(std::string_view name) {
    static const std::array<const PromptTemplate*, 6> all{&correct_solution(),       &incorrect_solution(),
                                                          &testgen_without_solution(), &testgen_with_solution(),
                                                          &reward_user(),            &reward_assistant()};
    for (const auto* t : all) {
        if (t->name == name) return *t;
    }
    throw ConfigError("unknown built-in prompt '" + std::string(name) + "'");
}

}  // namespace prompts
}  // namespace rankbench
