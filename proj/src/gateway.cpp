#include "eavit/gateway.hpp"

#include <cctype>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace eavit {

using json = nlohmann::json;

std::string role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    throw std::logic_error("bad role");
}

Role role_from_name(std::string_view name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    throw std::invalid_argument("unknown role '" + std::string(name) + "'");
}

int count_tokens(std::string_view text) {
    long units = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            if (!in_word) ++units;
            in_word = true;
        } else {
            in_word = false;
            if (!std::isspace(c)) ++units;  // punctuation counts one unit each
        }
    }
    return static_cast<int>((units * 4 + 2) / 3);  // ceil(units * 4/3)
}

namespace {

// FNV-1a 64-bit over a length-prefixed field serialization, so the digest is
// insensitive to how request fields happen to be ordered in any JSON form.
struct Fnv1a {
    std::uint64_t state = 1469598103934665603ULL;
    void feed(std::string_view s) {
        feed_size(s.size());
        for (unsigned char c : s) {
            state ^= c;
            state *= 1099511628211ULL;
        }
    }
    void feed_size(std::size_t n) {
        for (int i = 0; i < 8; ++i) {
            state ^= static_cast<unsigned char>(n >> (i * 8));
            state *= 1099511628211ULL;
        }
    }
};

std::string format_temperature(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", t);
    return buf;
}

}  // namespace

std::string request_digest(const ChatRequest& request) {
    Fnv1a h;
    h.feed(request.model);
    h.feed_size(request.messages.size());
    for (const auto& m : request.messages) {
        h.feed(role_name(m.role));
        h.feed(m.content);
    }
    h.feed(format_temperature(request.temperature));
    h.feed(request.sample_tag);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.state));
    return buf;
}

MockBackend::MockBackend(std::vector<std::string> script)
    : script_(script.begin(), script.end()) {}

void MockBackend::push(std::string response) {
    std::lock_guard lock(mutex_);
    script_.push_back(std::move(response));
}

int MockBackend::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::vector<ChatRequest> MockBackend::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

ChatExchange MockBackend::complete(const ChatRequest& request) {
    if (request.messages.empty()) throw std::invalid_argument("request has no messages");
    std::string response;
    {
        std::lock_guard lock(mutex_);
        requests_.push_back(request);
        if (script_.empty()) throw std::runtime_error("mock script exhausted");
        response = std::move(script_.front());
        script_.pop_front();
        ++calls_;
    }
    ChatExchange ex;
    ex.request = request;
    ex.response_text = std::move(response);
    long prompt = 0;
    for (const auto& m : request.messages) prompt += count_tokens(m.content);
    ex.usage = {prompt, count_tokens(ex.response_text)};
    ex.origin = Origin::mock;
    return ex;
}

namespace {

json exchange_to_json(const ChatExchange& ex, const std::string& digest) {
    json messages = json::array();
    for (const auto& m : ex.request.messages)
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    return json{{"digest", digest},
                {"request",
                 {{"model", ex.request.model},
                  {"messages", std::move(messages)},
                  {"temperature", ex.request.temperature},
                  {"max_output_tokens", ex.request.max_output_tokens},
                  {"sample_tag", ex.request.sample_tag}}},
                {"response", ex.response_text},
                {"usage",
                 {{"prompt_tokens", ex.usage.prompt_tokens},
                  {"completion_tokens", ex.usage.completion_tokens}}}};
}

ChatExchange exchange_from_json(const json& doc) {
    ChatExchange ex;
    const json& req = doc.at("request");
    ex.request.model = req.at("model").get<std::string>();
    for (const auto& m : req.at("messages"))
        ex.request.messages.push_back(
            {role_from_name(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
    ex.request.temperature = req.at("temperature").get<double>();
    ex.request.max_output_tokens = req.at("max_output_tokens").get<int>();
    ex.request.sample_tag = req.at("sample_tag").get<std::string>();
    ex.response_text = doc.at("response").get<std::string>();
    ex.usage.prompt_tokens = doc.at("usage").at("prompt_tokens").get<long>();
    ex.usage.completion_tokens = doc.at("usage").at("completion_tokens").get<long>();
    ex.origin = Origin::replay;
    return ex;
}

}  // namespace

ReplayStore::ReplayStore(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // fresh store
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json doc = json::parse(line);
        entries_[doc.at("digest").get<std::string>()] = exchange_from_json(doc);
    }
}

std::optional<ChatExchange> ReplayStore::find(const std::string& digest) const {
    auto it = entries_.find(digest);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ReplayStore::record(const ChatExchange& exchange) {
    std::string digest = request_digest(exchange.request);
    std::lock_guard lock(write_mutex_);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("cannot append to replay store: " + path_.string());
    out << exchange_to_json(exchange, digest).dump() << '\n';
    entries_[digest] = exchange;
}

std::size_t ReplayStore::size() const { return entries_.size(); }

ReplayBackend::ReplayBackend(std::shared_ptr<ReplayStore> store, bool strict,
                             std::shared_ptr<ChatBackend> fallback)
    : store_(std::move(store)), strict_(strict), fallback_(std::move(fallback)) {
    if (!store_) throw std::invalid_argument("replay backend requires a store");
}

ChatExchange ReplayBackend::complete(const ChatRequest& request) {
    std::string digest = request_digest(request);
    if (auto hit = store_->find(digest)) {
        hit->request = request;
        hit->origin = Origin::replay;
        return *hit;
    }
    if (strict_ || !fallback_)
        throw std::runtime_error("replay miss for request digest " + digest);
    ChatExchange ex = fallback_->complete(request);
    store_->record(ex);
    return ex;
}

ChatExchange FailBackend::complete(const ChatRequest&) {
    ++attempted_;
    throw std::runtime_error("network activity attempted on a no-network backend");
}

}  // namespace eavit
