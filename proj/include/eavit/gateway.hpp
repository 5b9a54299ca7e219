#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eavit {

enum class Role { system, user, assistant };

struct ChatMessage {
    Role role;
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::string sample_tag;  // distinguishes repeated samples of one prompt
};

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;

    TokenUsage& operator+=(const TokenUsage& o) {
        prompt_tokens += o.prompt_tokens;
        completion_tokens += o.completion_tokens;
        return *this;
    }
    long total() const { return prompt_tokens + completion_tokens; }
};

enum class Origin { live, replay, mock };

struct ChatExchange {
    ChatRequest request;
    std::string response_text;
    TokenUsage usage;
    Origin origin = Origin::mock;
};

/// Approximate token count for cost reporting: alphanumeric word runs plus
/// one unit per punctuation character, scaled by 4/3 and rounded up.
/// Provider usage numbers, when present, override this in reports.
int count_tokens(std::string_view text);

/// Stable content hash over (model, messages, temperature, sample_tag).
std::string request_digest(const ChatRequest& request);

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatExchange complete(const ChatRequest& request) = 0;
};

/// Scripted backend: answers from a FIFO of canned responses.
class MockBackend : public ChatBackend {
public:
    MockBackend() = default;
    explicit MockBackend(std::vector<std::string> script);
    void push(std::string response);
    ChatExchange complete(const ChatRequest& request) override;
    int calls() const;
    /// Requests seen so far, in completion order (including the one that
    /// exhausted the script).
    std::vector<ChatRequest> requests() const;

private:
    mutable std::mutex mutex_;
    std::deque<std::string> script_;
    std::vector<ChatRequest> requests_;
    int calls_ = 0;
};

/// Append-only line-delimited store of (digest, request, response, usage).
class ReplayStore {
public:
    explicit ReplayStore(std::filesystem::path path);

    std::optional<ChatExchange> find(const std::string& digest) const;
    void record(const ChatExchange& exchange);
    std::size_t size() const;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    mutable std::mutex write_mutex_;
    std::unordered_map<std::string, ChatExchange> entries_;
};

/// Replay backend: answers from the store by request digest. In strict mode
/// a miss is an error naming the digest; otherwise misses fall through to an
/// optional inner backend and are recorded.
class ReplayBackend : public ChatBackend {
public:
    ReplayBackend(std::shared_ptr<ReplayStore> store, bool strict = true,
                  std::shared_ptr<ChatBackend> fallback = nullptr);
    ChatExchange complete(const ChatRequest& request) override;

private:
    std::shared_ptr<ReplayStore> store_;
    bool strict_;
    std::shared_ptr<ChatBackend> fallback_;
};

struct HttpBackendConfig {
    std::string base_url;  // e.g. https://api.openai.com
    std::string path = "/v1/chat/completions";
    std::string api_key;  // usually from an environment variable
    int max_attempts = 3;
    int backoff_initial_ms = 500;
    int backoff_cap_ms = 8000;
    int concurrency = 4;
    int timeout_seconds = 120;
};

/// Live OpenAI-compatible chat-completions client with capped exponential
/// backoff on transient failures and a bounded in-flight request count.
class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ~HttpBackend() override;
    ChatExchange complete(const ChatRequest& request) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Test instrument: fails on any call, proving a code path performs no
/// network activity.
class FailBackend : public ChatBackend {
public:
    ChatExchange complete(const ChatRequest& request) override;
    int attempted_calls() const { return attempted_; }

private:
    int attempted_ = 0;
};

std::string role_name(Role role);
Role role_from_name(std::string_view name);

}  // namespace eavit
