#include <chrono>
#include <semaphore>
#include <stdexcept>
#include <thread>

#include "eavit/gateway.hpp"

#ifdef EAVIT_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

namespace eavit {

using json = nlohmann::json;

struct HttpBackend::Impl {
    HttpBackendConfig config;
    std::counting_semaphore<256> slots;

    explicit Impl(HttpBackendConfig cfg)
        : config(std::move(cfg)), slots(std::max(1, config.concurrency)) {}
};

HttpBackend::HttpBackend(HttpBackendConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
    if (impl_->config.base_url.empty()) throw std::invalid_argument("http backend: empty base URL");
}

HttpBackend::~HttpBackend() = default;

namespace {

json request_body(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    return json{{"model", request.model},
                {"messages", std::move(messages)},
                {"temperature", request.temperature},
                {"max_tokens", request.max_output_tokens}};
}

bool transient_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

}  // namespace

ChatExchange HttpBackend::complete(const ChatRequest& request) {
    if (request.messages.empty()) throw std::invalid_argument("request has no messages");
    const auto& cfg = impl_->config;
    impl_->slots.acquire();
    struct Release {
        std::counting_semaphore<256>& s;
        ~Release() { s.release(); }
    } release{impl_->slots};

    httplib::Client client(cfg.base_url);
    client.set_connection_timeout(cfg.timeout_seconds);
    client.set_read_timeout(cfg.timeout_seconds);
    httplib::Headers headers;
    if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);

    std::string body = request_body(request).dump();
    std::string last_error;
    int delay_ms = cfg.backoff_initial_ms;
    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
        auto res = client.Post(cfg.path, headers, body, "application/json");
        if (res && res->status == 200) {
            json doc = json::parse(res->body);
            ChatExchange ex;
            ex.request = request;
            ex.response_text =
                doc.at("choices").at(0).at("message").at("content").get<std::string>();
            if (doc.contains("usage")) {
                ex.usage.prompt_tokens = doc["usage"].value("prompt_tokens", 0L);
                ex.usage.completion_tokens = doc["usage"].value("completion_tokens", 0L);
            } else {
                long prompt = 0;
                for (const auto& m : request.messages) prompt += count_tokens(m.content);
                ex.usage = {prompt, count_tokens(ex.response_text)};
            }
            ex.origin = Origin::live;
            return ex;
        }
        if (res && !transient_status(res->status))
            throw std::runtime_error("chat endpoint returned status " +
                                     std::to_string(res->status) + ": " + res->body);
        last_error = res ? "status " + std::to_string(res->status)
                         : "transport error " + httplib::to_string(res.error());
        if (attempt < cfg.max_attempts) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            delay_ms = std::min(delay_ms * 2, cfg.backoff_cap_ms);
        }
    }
    throw std::runtime_error("chat request failed after " + std::to_string(cfg.max_attempts) +
                             " attempts: " + last_error);
}

}  // namespace eavit
