#include "rankbench/solution_gen.hpp"

#include <algorithm>
#include <cctype>

#include "rankbench/errors.hpp"
#include "rankbench/parallel.hpp"

namespace rankbench {

using nlohmann::json;

void validate(const GenerationConfig& cfg) {
    if (cfg.temperature < 0) throw ConfigError("temperature must be >= 0");
    if (!(cfg.top_p > 0 && cfg.top_p <= 1)) throw ConfigError("top_p must be in (0, 1]");
    if (cfg.rounds < 1) throw ConfigError("rounds must be >= 1");
    if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
    if (cfg.prompts.empty()) throw ConfigError("at least one prompt template is required");
    if (cfg.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    for (const auto& p : cfg.prompts) {
        if (!has_placeholder(p.body, "question")) {
            throw ConfigError("prompt template '" + p.name + "' has no {question} placeholder");
        }
    }
}

std::string render_prompt(const PromptTemplate& tmpl, std::string_view question,
                          const std::optional<std::string>& solution) {
    if (!has_placeholder(tmpl.body, "question")) {
        throw ValidationError("template '" + tmpl.name + "' has no {question} placeholder");
    }
    const bool wants_solution = has_placeholder(tmpl.body, "solution");
    if (solution && !wants_solution) {
        throw ValidationError("template '" + tmpl.name + "' has no {solution} placeholder");
    }
    if (!solution && wants_solution) {
        throw ValidationError("template '" + tmpl.name + "' requires a solution");
    }
    std::map<std::string, std::string, std::less<>> values{{"question", std::string(question)}};
    if (solution) values["solution"] = *solution;
    return substitute(tmpl.body, values);
}

namespace {

std::string lower_trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    std::string out(s.substr(b, e - b + 1));
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool label_matches(const std::string& label, std::string_view language) {
    const std::string lang = lower_trim(language);
    if (label == lang) return true;
    if (lang == "python") return label == "py" || label == "python3";
    return false;
}

struct Fence {
    std::string label;
    std::string body;
};

std::vector<Fence> fenced_blocks(std::string_view text) {
    std::vector<Fence> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto eol = text.find('\n', pos);
        const auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        const auto first = line.find_first_not_of(" \t");
        if (eol != std::string_view::npos && first != std::string_view::npos && line.substr(first, 3) == "```") {
            const std::size_t body_start = eol + 1;
            const auto close = text.find("```", body_start);
            if (close == std::string_view::npos) break;  // unterminated block
            auto body = text.substr(body_start, close - body_start);
            // Drop the indentation preceding the closing fence.
            const auto last_nl = body.find_last_of('\n');
            if (last_nl != std::string_view::npos &&
                body.substr(last_nl + 1).find_first_not_of(" \t") == std::string_view::npos) {
                body = body.substr(0, last_nl + 1);
            }
            out.push_back({lower_trim(line.substr(first + 3)), std::string(body)});
            const auto after = text.find('\n', close);
            pos = after == std::string_view::npos ? text.size() : after + 1;
            continue;
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return out;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

}  // namespace

std::optional<std::string> extract_code(std::string_view response, std::string_view language) {
    const auto blocks = fenced_blocks(response);
    for (const auto& b : blocks) {
        if (label_matches(b.label, language)) return blank(b.body) ? std::nullopt : std::optional(b.body);
    }
    for (const auto& b : blocks) {
        if (b.label.empty()) return blank(b.body) ? std::nullopt : std::optional(b.body);
    }
    return std::nullopt;
}

json record_to_json(const GenerationRecord& r) {
    json j = {{"task_id", r.task_id},   {"client", r.client},     {"iteration", r.iteration},
              {"round", r.round},       {"prompt", r.prompt},     {"seed", r.seed},
              {"sample_index", r.sample_index}, {"temperature", r.temperature}, {"top_p", r.top_p},
              {"attempts", r.attempts}, {"extracted", r.extracted}};
    j["response"] = r.response ? json(*r.response) : json(nullptr);
    j["error"] = r.error ? json(*r.error) : json(nullptr);
    return j;
}

GenerationResult generate_solutions(const Problem& problem, ChatClient& client, const GenerationConfig& cfg,
                                    int iteration) {
    validate(cfg);
    const int n_prompts = static_cast<int>(cfg.prompts.size());
    const int n_seeds = static_cast<int>(cfg.seeds.size());
    const int per_iteration = cfg.rounds * n_prompts * n_seeds;

    std::vector<GenerationRecord> records(static_cast<std::size_t>(per_iteration));
    std::vector<std::optional<std::string>> extracted(records.size());

    parallel_for_index(records.size(), static_cast<std::size_t>(cfg.max_in_flight), [&](std::size_t i) {
        const int local = static_cast<int>(i);
        const int round = iteration * cfg.rounds + local / (n_prompts * n_seeds);
        const int p = (local / n_seeds) % n_prompts;
        const int s = local % n_seeds;
        const auto& tmpl = cfg.prompts[static_cast<std::size_t>(p)];

        GenerationRecord& rec = records[i];
        rec.task_id = problem.task_id;
        rec.client = client.describe();
        rec.iteration = iteration;
        rec.round = round;
        rec.prompt = tmpl.name;
        // Distinct seed per round so repeated rounds do not replay one sample.
        rec.seed = cfg.seeds[static_cast<std::size_t>(s)] + 100000LL * round;
        rec.sample_index = iteration * per_iteration + local;
        rec.temperature = cfg.temperature;
        rec.top_p = cfg.top_p;

        ChatRequest req;
        req.messages = {{"user", render_prompt(tmpl, problem.question)}};
        req.temperature = cfg.temperature;
        req.top_p = cfg.top_p;
        req.seed = rec.seed;
        req.max_tokens = cfg.max_tokens;
        req.tag = RequestTag{"solution", problem.task_id, rec.sample_index, -1, 0};
        try {
            auto resp = complete_with_retry(client, req, cfg.retry, &rec.attempts);
            rec.response = resp.content;
            extracted[i] = extract_code(resp.content, cfg.language);
            rec.extracted = extracted[i].has_value();
        } catch (const TransportError& e) {
            rec.error = e.what();
        }
    });

    GenerationResult out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (extracted[i]) out.candidates.push_back(std::move(*extracted[i]));
    }
    out.records = std::move(records);
    return out;
}

}  // namespace rankbench
