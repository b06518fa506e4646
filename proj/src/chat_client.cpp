#include "rankbench/chat_client.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "rankbench/benchmark_io.hpp"
#include "rankbench/errors.hpp"

namespace rankbench {

using nlohmann::json;

ChatResponse complete_with_retry(ChatClient& client, const ChatRequest& request, const RetryPolicy& policy,
                                 int* attempts_used) {
    auto backoff = policy.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        if (attempts_used) *attempts_used = attempt + 1;
        try {
            return client.complete(request);
        } catch (const TransportError&) {
            if (attempt >= policy.max_retries) throw;
        }
        std::this_thread::sleep_for(backoff);
        backoff = std::min(policy.max_backoff, std::chrono::milliseconds(static_cast<long long>(
                                                   static_cast<double>(backoff.count()) * policy.backoff_multiplier)));
    }
}

RetryPolicy retry_policy_from_json(const json& cfg) {
    RetryPolicy p;
    p.max_retries = cfg.value("max_retries", p.max_retries);
    p.initial_backoff = std::chrono::milliseconds(cfg.value("initial_backoff_ms", 500));
    p.backoff_multiplier = cfg.value("backoff_multiplier", p.backoff_multiplier);
    p.max_backoff = std::chrono::milliseconds(cfg.value("max_backoff_ms", 30000));
    if (p.max_retries < 0) throw ConfigError("max_retries must be >= 0");
    return p;
}

// ---------------------------------------------------------------------------

OpenAiChatClient::OpenAiChatClient(OpenAiClientConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.model.empty()) throw ConfigError("chat client: model is required");
    if (cfg_.endpoint.empty()) throw ConfigError("chat client: endpoint is required");
    if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
    }
}

std::string OpenAiChatClient::describe() const { return "openai:" + cfg_.model + "@" + cfg_.endpoint; }

json OpenAiChatClient::build_body(const ChatRequest& r) const {
    json messages = json::array();
    for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    json body = {{"model", cfg_.model}, {"messages", messages}, {"temperature", r.temperature}};
    if (r.top_p) body["top_p"] = *r.top_p;
    if (r.seed) body["seed"] = *r.seed;
    if (r.max_tokens) body["max_tokens"] = *r.max_tokens;
    for (const auto& [k, v] : cfg_.extra_body.items()) body[k] = v;
    return body;
}

ChatResponse OpenAiChatClient::parse_body(const std::string& body) {
    const auto j = json::parse(body, nullptr, false);
    if (j.is_discarded()) throw TransportError("chat endpoint returned non-JSON body");
    try {
        const auto& choice = j.at("choices").at(0);
        ChatResponse r;
        const auto& content = choice.at("message").at("content");
        r.content = content.is_string() ? content.get<std::string>() : std::string();
        r.raw = j;
        return r;
    } catch (const json::exception& e) {
        throw TransportError(std::string("unexpected chat response shape: ") + e.what());
    }
}

void OpenAiChatClient::pace() {
    if (cfg_.min_interval_ms <= 0) return;
    std::unique_lock lock(pace_mu_);
    const auto next = last_start_ + std::chrono::milliseconds(cfg_.min_interval_ms);
    const auto now = std::chrono::steady_clock::now();
    if (next > now) std::this_thread::sleep_until(next);
    last_start_ = std::chrono::steady_clock::now();
}

ChatResponse OpenAiChatClient::complete(const ChatRequest& request) {
    // Split "scheme://host[:port]/prefix" into client base and path prefix.
    const auto scheme_end = cfg_.endpoint.find("://");
    const auto path_start = cfg_.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string base = cfg_.endpoint.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : cfg_.endpoint.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

    pace();
    httplib::Client http(base);
    http.set_connection_timeout(std::chrono::seconds(std::min(cfg_.timeout_s, 30)));
    http.set_read_timeout(std::chrono::seconds(cfg_.timeout_s));
    http.set_write_timeout(std::chrono::seconds(cfg_.timeout_s));
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const auto res = http.Post(prefix + "/chat/completions", headers, build_body(request).dump(), "application/json");
    if (!res) throw TransportError("chat request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
        throw TransportError("chat endpoint returned HTTP " + std::to_string(res->status) + ": " +
                             res->body.substr(0, 300));
    }
    return parse_body(res->body);
}

// ---------------------------------------------------------------------------

ScriptedChatClient::ScriptedChatClient(Handler handler, std::string name)
    : handler_(std::move(handler)), name_(std::move(name)) {}

ChatResponse ScriptedChatClient::complete(const ChatRequest& request) {
    {
        std::lock_guard lock(mu_);
        ++calls_;
    }
    return handler_(request);
}

int ScriptedChatClient::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::unique_ptr<ChatClient> make_script_client(const json& script, std::string name) {
    if (!script.is_object()) throw ConfigError("client script must be a JSON object");
    const std::string fallback = script.value("fallback", std::string("I cannot provide code for this request."));
    auto handler = [script, fallback](const ChatRequest& r) -> ChatResponse {
        const auto& t = r.tag;
        const auto lookup = [&](const char* section) -> const json* {
            auto s = script.find(section);
            if (s == script.end()) return nullptr;
            auto e = s->find(t.task_id);
            return e == s->end() ? nullptr : &*e;
        };
        if (t.purpose == "solution") {
            if (const json* list = lookup("solutions");
                list && list->is_array() && t.sample_index >= 0 && t.sample_index < static_cast<int>(list->size())) {
                const auto& v = (*list)[static_cast<std::size_t>(t.sample_index)];
                if (v.is_null()) throw TransportError("scripted transport failure");
                return {v.get<std::string>(), {}};
            }
        } else if (t.purpose == "testgen") {
            if (const json* v = lookup("testgen")) {
                if (v->is_string()) return {v->get<std::string>(), {}};
                if (v->is_object()) {
                    if (auto c = v->find(std::to_string(t.count)); c != v->end()) return {c->get<std::string>(), {}};
                }
            }
        } else if (t.purpose == "reward") {
            if (const json* list = lookup("rewards");
                list && list->is_array() && t.solution_index >= 0 && t.solution_index < static_cast<int>(list->size())) {
                const auto& v = (*list)[static_cast<std::size_t>(t.solution_index)];
                if (v.is_null()) throw TransportError("scripted transport failure");
                std::ostringstream ss;
                ss.precision(17);
                ss << v.get<double>();
                return {ss.str(), {}};
            }
        }
        return {fallback, {}};
    };
    return std::make_unique<ScriptedChatClient>(std::move(handler), std::move(name));
}

std::unique_ptr<ChatClient> make_client(const json& cfg) {
    const std::string kind = cfg.value("kind", std::string("openai"));
    if (kind == "script") {
        const std::string path = cfg.value("path", std::string());
        if (path.empty()) throw ConfigError("script client needs 'path'");
        const auto script = json::parse(read_text(path), nullptr, false);
        if (script.is_discarded()) throw ConfigError("client script '" + path + "' is not valid JSON");
        return make_script_client(script, "script:" + path);
    }
    if (kind == "openai") {
        OpenAiClientConfig c;
        c.endpoint = cfg.value("endpoint", c.endpoint);
        c.model = cfg.value("model", c.model);
        c.api_key_env = cfg.value("api_key_env", c.api_key_env);
        c.timeout_s = cfg.value("timeout_s", c.timeout_s);
        c.min_interval_ms = cfg.value("min_interval_ms", c.min_interval_ms);
        if (auto it = cfg.find("extra_body"); it != cfg.end()) c.extra_body = *it;
        return std::make_unique<OpenAiChatClient>(std::move(c));
    }
    throw ConfigError("unknown client kind '" + kind + "' (expected openai|script)");
}

}  // namespace rankbench
