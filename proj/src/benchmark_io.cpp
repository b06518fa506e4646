#include "rankbench/benchmark_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_set>

#include "rankbench/errors.hpp"

namespace rankbench {

using nlohmann::json;

namespace {

std::string require_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        throw ValidationError(std::string("missing field '") + key + "'");
    }
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    throw ValidationError(std::string("field '") + key + "' must be a string");
}

std::optional<std::string> optional_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::vector<std::string> require_string_list(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) {
        throw ValidationError(std::string("field '") + key + "' must be a list of strings");
    }
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) throw ValidationError(std::string("field '") + key + "' must be a list of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::string_view trim_view(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::size_t indent_of(std::string_view line) {
    std::size_t n = 0;
    while (n < line.size() && (line[n] == ' ' || line[n] == '\t')) ++n;
    return n;
}

// Bracket depth change over one line of Python, ignoring brackets inside
// string literals and comments. `in_triple` carries an open triple quote
// across lines.
int bracket_delta(std::string_view line, char& in_triple) {
    int depth = 0;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (in_triple) {
            if (c == in_triple && line.substr(i, 3) == std::string(3, in_triple)) {
                in_triple = 0;
                i += 3;
                continue;
            }
            ++i;
            continue;
        }
        if (c == '#') break;
        if (c == '"' || c == '\'') {
            if (line.substr(i, 3) == std::string(3, c)) {
                in_triple = c;
                i += 3;
                continue;
            }
            ++i;
            while (i < line.size() && line[i] != c) {
                if (line[i] == '\\') ++i;
                ++i;
            }
            ++i;
            continue;
        }
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        ++i;
    }
    return depth;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) lines.push_back(std::move(cur));
    return lines;
}

// Groups lines into logical statements (bracket/continuation aware).
std::vector<std::vector<std::string>> group_statements(const std::vector<std::string>& lines) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> cur;
    int depth = 0;
    char in_triple = 0;
    for (const auto& line : lines) {
        if (cur.empty()) {
            const auto t = trim_view(line);
            if (t.empty() || t.front() == '#') continue;
        }
        cur.push_back(line);
        depth += bracket_delta(line, in_triple);
        const auto t = trim_view(line);
        const bool continued = !t.empty() && t.back() == '\\';
        if (depth <= 0 && !in_triple && !continued) {
            out.push_back(std::move(cur));
            cur.clear();
            depth = 0;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string join_dedented(const std::vector<std::string>& stmt) {
    const std::size_t base = indent_of(stmt.front());
    std::string s;
    for (std::size_t i = 0; i < stmt.size(); ++i) {
        const auto& line = stmt[i];
        const std::size_t cut = std::min(base, indent_of(line));
        if (i) s.push_back('\n');
        s += line.substr(cut);
    }
    return s;
}

bool starts_with_keyword(std::string_view s, std::string_view kw) {
    if (s.substr(0, kw.size()) != kw) return false;
    return s.size() == kw.size() || !(std::isalnum(static_cast<unsigned char>(s[kw.size()])) || s[kw.size()] == '_');
}

}  // namespace

SourceSchema parse_schema(std::string_view name) {
    if (name == "humaneval") return SourceSchema::humaneval;
    if (name == "mbpp") return SourceSchema::mbpp;
    if (name == "generic") return SourceSchema::generic;
    throw ConfigError("unknown benchmark schema '" + std::string(name) + "' (expected humaneval|mbpp|generic)");
}

std::vector<std::string> split_humaneval_check(std::string_view test_source, std::string_view entry_point) {
    const auto lines = split_lines(test_source);
    const auto whole = [&] {
        return std::vector<std::string>{std::string(test_source) + "\ncheck(" + std::string(entry_point) + ")\n"};
    };

    // Locate `def check(...)`; everything else at top level must be METADATA.
    std::size_t def_line = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (indent_of(lines[i]) == 0 && starts_with_keyword(trim_view(lines[i]), "def") &&
            trim_view(lines[i]).find("check(") != std::string_view::npos) {
            def_line = i;
            break;
        }
    }
    if (def_line == lines.size()) return whole();

    std::vector<std::string> top(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(def_line));
    for (const auto& stmt : group_statements(top)) {
        if (!starts_with_keyword(trim_view(stmt.front()), "METADATA")) return whole();
    }

    std::vector<std::string> body;
    std::size_t i = def_line + 1;
    for (; i < lines.size(); ++i) {
        const auto t = trim_view(lines[i]);
        if (!t.empty() && indent_of(lines[i]) == 0) break;
        body.push_back(lines[i]);
    }
    for (; i < lines.size(); ++i) {
        if (!trim_view(lines[i]).empty()) return whole();
    }

    const std::regex candidate(R"(\bcandidate\b)");
    std::vector<std::string> tests;
    for (const auto& stmt : group_statements(body)) {
        const auto first = trim_view(stmt.front());
        if (!starts_with_keyword(first, "assert")) {
            if (starts_with_keyword(first, "pass")) continue;
            return whole();
        }
        tests.push_back(std::regex_replace(join_dedented(stmt), candidate, std::string(entry_point)));
    }
    if (tests.empty()) return whole();
    return tests;
}

Problem problem_from_json(const json& j, SourceSchema schema) {
    if (!j.is_object()) throw ValidationError("line is not a JSON object");
    Problem p;
    p.task_id = require_string(j, "task_id");
    switch (schema) {
        case SourceSchema::humaneval: {
            p.question = require_string(j, "prompt");
            p.entry_point = require_string(j, "entry_point");
            const auto test = require_string(j, "test");
            p.predefined_tests = split_humaneval_check(test, *p.entry_point);
            if (auto body = optional_string(j, "canonical_solution")) p.canonical_solution = p.question + *body;
            break;
        }
        case SourceSchema::mbpp: {
            p.predefined_tests = require_string_list(j, "test_list");
            const auto text = require_string(j, "text");
            p.question = p.predefined_tests.empty() ? text : text + "\n" + p.predefined_tests.front();
            p.canonical_solution = optional_string(j, "code");
            if (auto setup = optional_string(j, "test_setup_code"); setup && !trim_view(*setup).empty()) {
                for (auto& t : p.predefined_tests) t = *setup + "\n" + t;
            }
            break;
        }
        case SourceSchema::generic:
            p.question = require_string(j, "question");
            p.predefined_tests = require_string_list(j, "predefined_tests");
            p.canonical_solution = optional_string(j, "canonical_solution");
            p.entry_point = optional_string(j, "entry_point");
            break;
    }
    if (p.task_id.empty()) throw ValidationError("empty task_id");
    if (trim_view(p.question).empty()) throw ValidationError("empty question for task '" + p.task_id + "'");
    return p;
}

json problem_to_json(const Problem& p) {
    json j = {{"task_id", p.task_id}, {"question", p.question}, {"predefined_tests", p.predefined_tests}};
    if (p.canonical_solution) j["canonical_solution"] = *p.canonical_solution;
    if (p.entry_point) j["entry_point"] = *p.entry_point;
    return j;
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::vector<json> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim_view(line).empty()) continue;
        try {
            rows.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return rows;
}

std::vector<Problem> load_benchmark(const std::filesystem::path& path, SourceSchema schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::vector<Problem> problems;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim_view(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(e.what(), line_no);
        }
        Problem p;
        try {
            p = problem_from_json(j, schema);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
        if (!seen.insert(p.task_id).second) {
            throw ValidationError("duplicate task_id '" + p.task_id + "' at line " + std::to_string(line_no));
        }
        problems.push_back(std::move(p));
    }
    return problems;
}

void validate_ranked_entry(const RankedEntry& e, std::size_t max_solutions) {
    const auto fail = [&](const std::string& why) {
        throw ValidationError("ranked entry '" + e.task_id + "': " + why);
    };
    if (e.task_id.empty()) fail("empty task_id");
    if (e.solutions.size() < 2) fail("fewer than 2 solutions");
    if (max_solutions && e.solutions.size() > max_solutions) fail("more than " + std::to_string(max_solutions) + " solutions");
    if (e.test_count < 1) fail("test_count must be positive");
    if (e.solutions.front().score != 1.0) fail("first solution score is not 1.0");
    for (std::size_t i = 0; i < e.solutions.size(); ++i) {
        const auto& s = e.solutions[i];
        if (!(s.score >= 0.0 && s.score <= 1.0)) fail("score outside [0,1]");
        if (s.rank != static_cast<int>(i) + 1) fail("rank " + std::to_string(s.rank) + " at position " + std::to_string(i + 1));
        if (s.mean_exec_ms < 0.0) fail("negative mean_exec_ms");
        if (i > 0 && !(s.score < e.solutions[i - 1].score)) {
            fail(s.score == e.solutions[i - 1].score ? "duplicate scores" : "solutions not sorted by descending score");
        }
    }
}

json ranked_entry_to_json(const RankedEntry& e) {
    json sols = json::array();
    for (const auto& s : e.solutions) {
        sols.push_back({{"code", s.code}, {"score", s.score}, {"rank", s.rank}, {"mean_exec_ms", s.mean_exec_ms}});
    }
    return {{"task_id", e.task_id}, {"question", e.question}, {"test_count", e.test_count}, {"solutions", sols}};
}

RankedEntry ranked_entry_from_json(const json& j) {
    RankedEntry e;
    e.task_id = require_string(j, "task_id");
    e.question = require_string(j, "question");
    e.test_count = j.at("test_count").get<int>();
    for (const auto& s : j.at("solutions")) {
        RankedSolution r;
        r.code = s.at("code").get<std::string>();
        r.score = s.at("score").get<double>();
        r.rank = s.at("rank").get<int>();
        r.mean_exec_ms = s.value("mean_exec_ms", 0.0);
        e.solutions.push_back(std::move(r));
    }
    return e;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_jsonl(const std::filesystem::path& path, std::span<const json> rows) {
    std::string text;
    for (const auto& r : rows) {
        text += r.dump();
        text.push_back('\n');
    }
    write_text(path, text);
}

void write_ranked_benchmark(std::span<const RankedEntry> entries, const std::filesystem::path& path) {
    std::vector<json> rows;
    rows.reserve(entries.size());
    for (const auto& e : entries) {
        validate_ranked_entry(e);
        rows.push_back(ranked_entry_to_json(e));
    }
    write_jsonl(path, rows);
}

std::vector<RankedEntry> load_ranked_benchmark(const std::filesystem::path& path) {
    std::vector<RankedEntry> entries;
    std::size_t idx = 0;
    for (const auto& row : read_jsonl(path)) {
        ++idx;
        RankedEntry e;
        try {
            e = ranked_entry_from_json(row);
        } catch (const json::exception& ex) {
            throw ParseError(std::string("ranked entry #") + std::to_string(idx) + ": " + ex.what(), 0);
        }
        validate_ranked_entry(e);
        entries.push_back(std::move(e));
    }
    return entries;
}

BenchmarkStats compute_stats(std::span<const RankedEntry> entries) {
    if (entries.empty()) throw std::invalid_argument("compute_stats: empty input");
    BenchmarkStats s;
    s.problem_count = entries.size();
    double tests = 0.0;
    double scores = 0.0;
    for (const auto& e : entries) {
        tests += e.test_count;
        for (const auto& sol : e.solutions) scores += sol.score;
        s.solution_count += e.solutions.size();
    }
    s.avg_tests = tests / static_cast<double>(s.problem_count);
    s.avg_solution_score = s.solution_count ? scores / static_cast<double>(s.solution_count) : 0.0;
    return s;
}

BenchmarkStats compute_stats(std::span<const Problem> problems, std::span<const std::vector<double>> solution_scores) {
    if (problems.empty()) throw std::invalid_argument("compute_stats: empty input");
    if (!solution_scores.empty() && solution_scores.size() != problems.size()) {
        throw std::invalid_argument("compute_stats: scores not aligned with problems");
    }
    BenchmarkStats s;
    s.problem_count = problems.size();
    double tests = 0.0;
    for (const auto& p : problems) tests += static_cast<double>(p.predefined_tests.size());
    double scores = 0.0;
    for (const auto& row : solution_scores) {
        for (double v : row) scores += v;
        s.solution_count += row.size();
    }
    s.avg_tests = tests / static_cast<double>(s.problem_count);
    s.avg_solution_score = s.solution_count ? scores / static_cast<double>(s.solution_count) : 0.0;
    return s;
}

json stats_to_json(const BenchmarkStats& s) {
    return {{"problem_count", s.problem_count},
            {"avg_tests", s.avg_tests},
            {"solution_count", s.solution_count},
            {"avg_solution_score", s.avg_solution_score}};
}

}  // namespace rankbench
