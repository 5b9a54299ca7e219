#include <random>

#include "doctest.h"
#include "eavit/gateway.hpp"
#include "test_helpers.hpp"

using namespace eavit;
using namespace eavit::test;

TEST_CASE("count_tokens follows the stated approximation") {
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens("a b c") == 4);  // ceil(3 * 4/3)
    CHECK(count_tokens("word") == 2);   // ceil(4/3)
    CHECK(count_tokens("...") == 4);    // three punctuation units
}

TEST_CASE("bundled Schwartz definitions land near the 2.5k-token mark") {
    std::string all;
    for (const auto& v : schwartz().values()) all += v.name + ": " + v.definition + "\n";
    int tokens = count_tokens(all);
    CHECK(tokens >= 2000);
    CHECK(tokens <= 3000);
}

TEST_CASE("count_tokens is monotone under concatenation") {
    std::mt19937 rng(7);
    const std::string alphabet = "abc de,. xyz;\n qq";
    for (int trial = 0; trial < 200; ++trial) {
        auto random_string = [&](int max_len) {
            std::string s;
            int len = static_cast<int>(rng() % max_len);
            for (int i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
            return s;
        };
        std::string a = random_string(40), b = random_string(40);
        int cab = count_tokens(a + b);
        CHECK(cab >= count_tokens(a));
        CHECK(cab >= count_tokens(b));
    }
}

namespace {

ChatRequest sample_request() {
    ChatRequest req;
    req.model = "m";
    req.messages = {{Role::system, "be terse"}, {Role::user, "hello"}};
    req.temperature = 0.7;
    req.sample_tag = "0";
    return req;
}

}  // namespace

TEST_CASE("request digests distinguish exactly the hashed fields") {
    ChatRequest a = sample_request();
    ChatRequest b = sample_request();
    CHECK(request_digest(a) == request_digest(b));

    b.sample_tag = "1";
    CHECK(request_digest(a) != request_digest(b));

    b = sample_request();
    b.temperature = 0.8;
    CHECK(request_digest(a) != request_digest(b));

    b = sample_request();
    b.messages[1].content = "hellp";
    CHECK(request_digest(a) != request_digest(b));

    // max_output_tokens is not part of the content identity
    b = sample_request();
    b.max_output_tokens = 9;
    CHECK(request_digest(a) == request_digest(b));
}

TEST_CASE("mock backend plays its script in order") {
    MockBackend mock({"hello", "world"});
    ChatRequest req = sample_request();
    ChatExchange ex = mock.complete(req);
    CHECK(ex.response_text == "hello");
    CHECK(ex.origin == Origin::mock);
    CHECK(ex.usage.prompt_tokens > 0);
    CHECK(mock.complete(req).response_text == "world");
    CHECK_THROWS_WITH_AS(mock.complete(req), doctest::Contains("mock script exhausted"),
                         std::runtime_error);
}

TEST_CASE("replay store records then replays byte-identically") {
    auto path = temp_file("replay.jsonl");
    auto store = std::make_shared<ReplayStore>(path);
    auto mock = std::make_shared<MockBackend>(std::vector<std::string>{"canned answer"});

    ReplayBackend recording(store, /*strict=*/false, mock);
    ChatRequest req = sample_request();
    ChatExchange live = recording.complete(req);
    CHECK(live.response_text == "canned answer");

    // Same request twice: answered from the store, mock untouched.
    ChatExchange replayed = recording.complete(req);
    CHECK(replayed.response_text == live.response_text);
    CHECK(replayed.usage.prompt_tokens == live.usage.prompt_tokens);
    CHECK(replayed.origin == Origin::replay);
    CHECK(mock->calls() == 1);

    // A fresh store loaded from disk serves the same bytes.
    auto store2 = std::make_shared<ReplayStore>(path);
    ReplayBackend strict(store2, /*strict=*/true);
    ChatExchange again = strict.complete(req);
    CHECK(again.response_text == live.response_text);
    CHECK(again.usage.completion_tokens == live.usage.completion_tokens);
}

TEST_CASE("strict replay miss names the request digest") {
    auto store = std::make_shared<ReplayStore>(temp_file("replay_empty.jsonl"));
    ReplayBackend strict(store, true);
    ChatRequest req = sample_request();
    const std::string digest = request_digest(req);
    CHECK_THROWS_WITH_AS(strict.complete(req), doctest::Contains(digest.c_str()),
                         std::runtime_error);
}

TEST_CASE("fail backend proves no-network paths") {
    FailBackend fail;
    CHECK_THROWS_AS(fail.complete(sample_request()), std::runtime_error);
    CHECK(fail.attempted_calls() == 1);
}
