#include "doctest.h"
#include "eavit/baselines.hpp"
#include "test_helpers.hpp"

using namespace eavit;
using namespace eavit::test;

namespace {

// One mock reply declaring every value in the batch irrelevant except `hits`.
std::string batch_reply(const ValueSystem& system, std::size_t begin, std::size_t end,
                        const std::vector<std::size_t>& hits) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        bool hit = std::count(hits.begin(), hits.end(), i) > 0;
        out += system.value(i).name + (hit ? " - Relevant." : " - Irrelevant.") + "\n";
    }
    return out;
}

// Synthetic roster whose names cannot collide with the worked example baked
// into the prompt template.
const ValueSystem& synthetic20() {
    static ValueSystem system = [] {
        std::vector<ValueDef> defs;
        for (int i = 0; i < 20; ++i) defs.push_back({"Quality" + std::to_string(i), "def"});
        return ValueSystem("synthetic", std::move(defs));
    }();
    return system;
}

}  // namespace

TEST_CASE("single-step strategy issues exactly one call") {
    const auto& system = schwartz();
    StrategyConfig config;
    config.batch_size = static_cast<int>(system.size());
    MockBackend mock({batch_reply(system, 0, system.size(), {2, 7})});
    auto result = run_strategy(mock, system, templates(), "text", config);
    CHECK(mock.requests().size() == 1);
    CHECK(result.labels.positives() == std::vector<std::size_t>{2, 7});
    CHECK(result.candidate_count == static_cast<int>(system.size()));
}

TEST_CASE("5-step strategy chunks 20 values into 5 calls of 4") {
    const auto& system = synthetic20();
    REQUIRE(system.size() == 20);
    StrategyConfig config;
    config.batch_size = 4;
    std::vector<std::string> script;
    for (std::size_t b = 0; b < 5; ++b) script.push_back(batch_reply(system, b * 4, b * 4 + 4, {9}));
    MockBackend mock(script);
    auto result = run_strategy(mock, system, templates(), "text", config);
    CHECK(mock.requests().size() == 5);
    CHECK(result.labels.positives() == std::vector<std::size_t>{9});
    // each batch prompt names only its own 4 values
    const auto requests = mock.requests();
    for (std::size_t b = 0; b < 5; ++b) {
        const auto& prompt = requests[b].messages.back().content;
        for (std::size_t i = 0; i < system.size(); ++i) {
            bool in_batch = i >= b * 4 && i < b * 4 + 4;
            CHECK(count_occurrences(prompt, system.value(i).name + ", Definition:") ==
                  (in_batch ? 1 : 0));
        }
    }
}

TEST_CASE("sequential strategy issues one call per value") {
    const auto& system = schwartz();
    StrategyConfig config;
    config.batch_size = 1;
    std::vector<std::string> script;
    for (std::size_t i = 0; i < system.size(); ++i) script.push_back(batch_reply(system, i, i + 1, {4}));
    MockBackend mock(script);
    auto result = run_strategy(mock, system, templates(), "text", config);
    CHECK(mock.requests().size() == system.size());
    CHECK(result.labels.positives() == std::vector<std::size_t>{4});
}

TEST_CASE("uneven batch sizes cover all values") {
    const auto& system = schwartz();
    StrategyConfig config;
    config.batch_size = 7;  // 7 + 7 + 6
    std::vector<std::string> script = {batch_reply(system, 0, 7, {}),
                                       batch_reply(system, 7, 14, {}),
                                       batch_reply(system, 14, 20, {19})};
    MockBackend mock(script);
    auto result = run_strategy(mock, system, templates(), "text", config);
    CHECK(mock.requests().size() == 3);
    CHECK(result.labels.positives() == std::vector<std::size_t>{19});
}

TEST_CASE("shuffle_seed permutes the roster deterministically") {
    const auto& system = synthetic20();
    StrategyConfig config;
    config.batch_size = static_cast<int>(system.size());
    config.shuffle_seed = 17;

    auto prompt_for = [&] {
        // reply order does not matter for label merging: name it all irrelevant
        MockBackend mock({batch_reply(system, 0, system.size(), {})});
        run_strategy(mock, system, templates(), "text", config);
        return mock.requests().front().messages.back().content;
    };
    auto a = prompt_for();
    CHECK(a == prompt_for());  // same seed, same order

    config.shuffle_seed = 18;
    auto b = prompt_for();
    CHECK(a != b);

    // every value still appears exactly once regardless of seed
    for (std::size_t i = 0; i < system.size(); ++i)
        CHECK(count_occurrences(b, system.value(i).name + ", Definition:") == 1);
}

TEST_CASE("chain-of-thought flag switches the template") {
    const auto& system = schwartz();
    StrategyConfig config;
    config.batch_size = static_cast<int>(system.size());
    config.cot = true;
    MockBackend mock({batch_reply(system, 0, system.size(), {})});
    run_strategy(mock, system, templates(), "text", config);
    CHECK(mock.requests().front().messages.back().content.find("step by step") !=
          std::string::npos);
}

TEST_CASE("batch failures name the failing batch") {
    const auto& system = schwartz();
    StrategyConfig config;
    config.batch_size = 4;
    MockBackend mock({batch_reply(system, 0, 4, {}), batch_reply(system, 4, 8, {})});  // dies on 3rd
    CHECK_THROWS_WITH_AS(run_strategy(mock, system, templates(), "text", config),
                         doctest::Contains("baseline batch 2"), std::runtime_error);
}

TEST_CASE("strategy config validation") {
    const auto& system = schwartz();
    MockBackend mock;
    StrategyConfig config;
    config.batch_size = 0;
    CHECK_THROWS_AS(run_strategy(mock, system, templates(), "text", config),
                    std::invalid_argument);
}
