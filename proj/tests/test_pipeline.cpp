#include <random>

#include "doctest.h"
#include "eavit/pipeline.hpp"
#include "test_helpers.hpp"

using namespace eavit;
using namespace eavit::test;

namespace {

RelevanceEstimate estimate_of(std::vector<double> probs) {
    return RelevanceEstimate{std::move(probs), 5};
}

// Direct predicate evaluation, kept deliberately separate from partition().
void oracle_cell(double p, const PartitionConfig& cfg, bool& confirmed, bool& candidate,
                 bool& rejected) {
    confirmed = p > cfg.p_high;
    candidate = cfg.p_low <= p && p <= cfg.p_high;
    rejected = p < cfg.p_low;
}

}  // namespace

TEST_CASE("partition applies the threshold predicates") {
    PartitionConfig cfg{0.2, 0.8};
    auto part = partition(estimate_of({0.9, 0.6, 0.1}), cfg);
    CHECK(part.confirmed == std::vector<std::size_t>{0});
    CHECK(part.candidates == std::vector<std::size_t>{1});
    CHECK(part.rejected == std::vector<std::size_t>{2});
}

TEST_CASE("partition boundaries are exact") {
    PartitionConfig cfg{0.2, 0.8};
    auto at_high = partition(estimate_of({0.8}), cfg);
    CHECK(at_high.candidates == std::vector<std::size_t>{0});  // strict > for confirmed
    auto at_low = partition(estimate_of({0.2}), cfg);
    CHECK(at_low.candidates == std::vector<std::size_t>{0});
    auto zeros = partition(estimate_of({0.0, 0.0, 0.0}), cfg);
    CHECK(zeros.rejected.size() == 3);
    CHECK(zeros.candidates.empty());
    CHECK(zeros.confirmed.empty());
}

TEST_CASE("partition config validation") {
    CHECK_THROWS_AS(partition(estimate_of({0.5}), PartitionConfig{0.9, 0.2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(partition(estimate_of({0.5}), PartitionConfig{0.0, 0.8}),
                    std::invalid_argument);
    CHECK_THROWS_AS(partition(estimate_of({0.5}), PartitionConfig{0.2, 1.0}),
                    std::invalid_argument);
}

TEST_CASE("partition matches the predicate oracle and covers disjointly") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        PartitionConfig cfg;
        do {
            cfg.p_low = unit(rng);
            cfg.p_high = unit(rng);
        } while (!(0.0 < cfg.p_low && cfg.p_low < cfg.p_high && cfg.p_high < 1.0));
        std::vector<double> probs(20);
        for (auto& p : probs) p = (rng() % 6) / 5.0;  // multiples of 1/5
        auto part = partition(estimate_of(probs), cfg);

        std::vector<int> seen(probs.size(), 0);
        for (auto i : part.confirmed) ++seen[i];
        for (auto i : part.candidates) ++seen[i];
        for (auto i : part.rejected) ++seen[i];
        for (auto s : seen) CHECK(s == 1);  // disjoint cover

        for (std::size_t i = 0; i < probs.size(); ++i) {
            bool c, m, r;
            oracle_cell(probs[i], cfg, c, m, r);
            bool in_c = std::count(part.confirmed.begin(), part.confirmed.end(), i);
            bool in_m = std::count(part.candidates.begin(), part.candidates.end(), i);
            bool in_r = std::count(part.rejected.begin(), part.rejected.end(), i);
            CHECK(in_c == c);
            CHECK(in_m == m);
            CHECK(in_r == r);
        }
    }
}

TEST_CASE("raising a probability never demotes a value") {
    PartitionConfig cfg{0.2, 0.8};
    auto rank = [&](double p) {
        auto part = partition(estimate_of({p}), cfg);
        if (!part.confirmed.empty()) return 2;
        if (!part.candidates.empty()) return 1;
        return 0;
    };
    for (double lo = 0.0; lo <= 1.0; lo += 0.05)
        for (double hi = lo; hi <= 1.0; hi += 0.05) CHECK(rank(hi) >= rank(lo));
}

TEST_CASE("parse_final_response handles the plain output shape") {
    std::vector<ValueDef> candidates = {{"A", "da"}, {"B", "db"}};
    auto verdicts =
        parse_final_response("A - Relevant. Explanation: yes\nB - Irrelevant. Explanation: no",
                             candidates);
    CHECK(verdicts.at("A") == Verdict::relevant);
    CHECK(verdicts.at("B") == Verdict::irrelevant);
}

TEST_CASE("parse_final_response handles the chain-of-thought closing sentence") {
    std::vector<ValueDef> candidates = {{"Self-direction: thought", "d"}};
    auto verdicts = parse_final_response(
        "First, the text mentions Self-direction: thought ideas and creativity.\n"
        "As a result, I identify Self-direction: thought as 'Relevant'.",
        candidates);
    CHECK(verdicts.at("Self-direction: thought") == Verdict::relevant);
}

TEST_CASE("parse_final_response reports unmatched candidates") {
    std::vector<ValueDef> candidates = {{"A", "da"}, {"B", "db"}};
    auto verdicts = parse_final_response("", candidates);
    CHECK(verdicts.at("A") == Verdict::unresolved);
    CHECK(verdicts.at("B") == Verdict::unresolved);
    auto mixed = parse_final_response("B - IRRELEVANT.", candidates);
    CHECK(mixed.at("A") == Verdict::unresolved);
    CHECK(mixed.at("B") == Verdict::irrelevant);
}

TEST_CASE("finalize short-circuits on an empty candidate set") {
    const auto& system = schwartz();
    CandidatePartition part;
    part.confirmed = {0};
    for (std::size_t i = 1; i < system.size(); ++i) part.rejected.push_back(i);
    FailBackend no_network;
    auto result = finalize(no_network, system, templates(), "text", part, {});
    CHECK(result.labels[0] == 1);
    CHECK(result.labels.positives() == std::vector<std::size_t>{0});
    CHECK(result.provenance[0] == Provenance::detector_confirmed);
    CHECK(result.llm_usage.total() == 0);
    CHECK(result.candidate_count == 0);
    CHECK(no_network.attempted_calls() == 0);
}

TEST_CASE("finalize merges LLM verdicts over the candidate set") {
    const auto& system = schwartz();
    CandidatePartition part;
    part.confirmed = {0};
    part.candidates = {1, 2};
    for (std::size_t i = 3; i < system.size(); ++i) part.rejected.push_back(i);
    MockBackend mock({system.value(1).name + " - Relevant. Explanation: x\n" +
                      system.value(2).name + " - Irrelevant. Explanation: y"});
    auto result = finalize(mock, system, templates(), "text", part, {});
    CHECK(result.labels[0] == 1);
    CHECK(result.labels[1] == 1);
    CHECK(result.labels[2] == 0);
    CHECK(result.provenance[1] == Provenance::llm_relevant);
    CHECK(result.provenance[2] == Provenance::llm_irrelevant);
    CHECK(result.provenance[5] == Provenance::detector_rejected);
    CHECK(result.candidate_count == 2);
    CHECK(result.llm_usage.total() > 0);
    CHECK(result.usage_total.total() == result.llm_usage.total());
    // rejected values never end up positive
    for (auto i : part.rejected) CHECK(result.labels[i] == 0);
}

TEST_CASE("finalize defaults unresolved candidates to 0 with a warning") {
    const auto& system = schwartz();
    CandidatePartition part;
    part.candidates = {1, 2};
    for (std::size_t i = 0; i < system.size(); ++i)
        if (i != 1 && i != 2) part.rejected.push_back(i);
    MockBackend mock({"no verdicts here"});
    auto result = finalize(mock, system, templates(), "text", part, {});
    CHECK(result.labels.positives().empty());
    CHECK(result.warnings.size() == 2);
}

namespace {

std::vector<std::string> detector_script(const ValueSystem& system, std::size_t value_index,
                                         int positive_count, int total) {
    std::vector<std::string> script;
    for (int j = 0; j < total; ++j) {
        if (j < positive_count)
            script.push_back("(1) " + system.value(value_index).name + ". Explanation: e;");
        else
            script.push_back("(1) " + system.value(19).name + ". Explanation: filler;");
    }
    return script;
}

}  // namespace

TEST_CASE("identify runs the full cascade deterministically") {
    const auto& system = schwartz();
    PipelineConfig config;
    config.sampling.samples = 5;

    SUBCASE("value in 5/5 samples is detector-confirmed, no LLM call") {
        // filler value appears 0/5 times; Hedonism 5/5
        std::vector<std::string> script(5, "(1) Hedonism. Explanation: e;");
        MockBackend detector(script);
        FailBackend llm;
        auto result = identify(detector, llm, system, templates(), "text", config);
        auto idx = *system.index_of("Hedonism");
        CHECK(result.provenance[idx] == Provenance::detector_confirmed);
        CHECK(result.candidate_count == 0);
        CHECK(llm.attempted_calls() == 0);
        CHECK(result.detector_usage.total() > 0);
        CHECK(result.usage_total.total() == result.detector_usage.total());
    }

    SUBCASE("value in 2/5 samples (0.4) is resolved by the LLM") {
        auto script = detector_script(system, 3, 2, 5);  // Hedonism 2/5, filler 3/5
        MockBackend detector(script);
        MockBackend llm({"Hedonism - Relevant. Explanation: x\n" + system.value(19).name +
                         " - Irrelevant. Explanation: y"});
        auto result = identify(detector, llm, system, templates(), "text", config);
        CHECK(result.provenance[3] == Provenance::llm_relevant);
        CHECK(result.labels[3] == 1);
        // filler at 3/5 = 0.6 was also a candidate, resolved irrelevant
        CHECK(result.provenance[19] == Provenance::llm_irrelevant);
        CHECK(result.candidate_count == 2);
        CHECK(result.usage_total.total() ==
              result.detector_usage.total() + result.llm_usage.total());
    }

    SUBCASE("scripted runs are byte-stable across invocations") {
        auto run = [&] {
            MockBackend detector(detector_script(system, 3, 2, 5));
            MockBackend llm({"Hedonism - Relevant.\n" + system.value(19).name + " - Irrelevant."});
            return identify(detector, llm, system, templates(), "text", config);
        };
        auto a = run();
        auto b = run();
        CHECK(a.labels == b.labels);
        CHECK(a.provenance == b.provenance);
        CHECK(a.usage_total.total() == b.usage_total.total());
    }

    SUBCASE("stage errors carry stage tags") {
        MockBackend detector(std::vector<std::string>{});  // exhausted immediately
        FailBackend llm;
        CHECK_THROWS_WITH_AS(identify(detector, llm, system, templates(), "text", config),
                             doctest::Contains("detector stage"), std::runtime_error);
    }
}
