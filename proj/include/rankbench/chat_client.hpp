#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace rankbench {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

// Request metadata never sent on the wire; lets scripted clients answer
// deterministically regardless of call order.
struct RequestTag {
    std::string purpose;  // "solution" | "testgen" | "reward"
    std::string task_id;
    int sample_index = -1;
    int solution_index = -1;
    int count = 0;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 1.0;
    std::optional<double> top_p;
    std::optional<long long> seed;
    std::optional<int> max_tokens;
    RequestTag tag;
};

struct ChatResponse {
    std::string content;
    nlohmann::json raw;  // provider payload, if any
};

/// A chat-completion endpoint. Implementations must be safe to call from
/// several threads at once. Failures are reported by throwing TransportError.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual std::string describe() const = 0;
};

struct RetryPolicy {
    int max_retries = 3;  // attempts after the first
    std::chrono::milliseconds initial_backoff{500};
    double backoff_multiplier = 2.0;
    std::chrono::milliseconds max_backoff{30000};
};

/// Calls client.complete, retrying TransportError up to policy.max_retries
/// times with exponential backoff. Rethrows the last error.
ChatResponse complete_with_retry(ChatClient& client, const ChatRequest& request, const RetryPolicy& policy,
                                 int* attempts_used = nullptr);

struct OpenAiClientConfig {
    std::string endpoint = "https://api.openai.com/v1";  // base URL; /chat/completions is appended
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    int timeout_s = 300;
    int min_interval_ms = 0;  // per-client rate limit between request starts
    nlohmann::json extra_body = nlohmann::json::object();
};

/// OpenAI-compatible /chat/completions over HTTP(S). The API key is read from
/// the environment variable named in the config, never from flags or files.
class OpenAiChatClient final : public ChatClient {
public:
    explicit OpenAiChatClient(OpenAiClientConfig cfg);

    ChatResponse complete(const ChatRequest& request) override;
    std::string describe() const override;

    nlohmann::json build_body(const ChatRequest& request) const;
    static ChatResponse parse_body(const std::string& body);

private:
    void pace();

    OpenAiClientConfig cfg_;
    std::string api_key_;
    std::mutex pace_mu_;
    std::chrono::steady_clock::time_point last_start_{};
};

/// In-process client driven by a callback; the standard test double.
class ScriptedChatClient final : public ChatClient {
public:
    using Handler = std::function<ChatResponse(const ChatRequest&)>;
    explicit ScriptedChatClient(Handler handler, std::string name = "scripted");

    ChatResponse complete(const ChatRequest& request) override;
    std::string describe() const override { return name_; }
    int calls() const;

private:
    Handler handler_;
    std::string name_;
    mutable std::mutex mu_;
    int calls_ = 0;
};

/// Builds a scripted client from a JSON script:
///   {"solutions": {task_id: [response, ...]},   indexed by sample_index
///    "testgen":   {task_id: response | {count: response}},
///    "rewards":   {task_id: [raw score, ...]},  indexed by solution_index
///    "fallback":  response}
/// Missing entries answer with the fallback (default: prose without code).
std::unique_ptr<ChatClient> make_script_client(const nlohmann::json& script, std::string name = "script");

/// Client from a config object: {"kind": "openai", ...OpenAiClientConfig} or
/// {"kind": "script", "path": file}.
std::unique_ptr<ChatClient> make_client(const nlohmann::json& cfg);

RetryPolicy retry_policy_from_json(const nlohmann::json& cfg);

}  // namespace rankbench
