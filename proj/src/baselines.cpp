#include "eavit/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace eavit {

FinalResult run_strategy(ChatBackend& backend, const ValueSystem& system,
                         const TemplateLibrary& templates, const std::string& text,
                         const StrategyConfig& config) {
    const std::size_t n = system.size();
    if (config.batch_size < 1 || static_cast<std::size_t>(config.batch_size) > n)
        throw std::invalid_argument("batch_size must be in [1, system size]");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (config.shuffle_seed) {
        std::mt19937 rng(*config.shuffle_seed);
        std::shuffle(order.begin(), order.end(), rng);
    }

    FinalResult result{LabelVector::zeros(system),
                       std::vector<Provenance>(n, Provenance::llm_irrelevant),
                       {}, {}, {}, static_cast<int>(n), {}};
    const std::size_t batch = static_cast<std::size_t>(config.batch_size);
    for (std::size_t begin = 0; begin < n; begin += batch) {
        std::size_t end = std::min(begin + batch, n);
        std::vector<std::size_t> indices(order.begin() + begin, order.begin() + end);
        std::vector<ValueDef> values;
        values.reserve(indices.size());
        for (auto i : indices) values.push_back(system.value(i));

        ChatRequest req;
        req.model = config.model;
        req.messages = {{Role::user, templates.baseline_prompt(values, text, config.cot)}};
        req.temperature = config.temperature;
        req.max_output_tokens = config.max_output_tokens;
        ChatExchange ex;
        try {
            ex = backend.complete(req);
        } catch (const std::exception& e) {
            throw std::runtime_error("baseline batch " + std::to_string(begin / batch) +
                                     " failed: " + e.what());
        }
        result.llm_usage += ex.usage;
        result.usage_total += ex.usage;

        auto verdicts = parse_final_response(ex.response_text, values);
        for (auto i : indices) {
            Verdict v = verdicts.at(system.value(i).name);
            if (v == Verdict::relevant) {
                result.labels.set(i, true);
                result.provenance[i] = Provenance::llm_relevant;
            } else {
                if (v == Verdict::unresolved)
                    result.warnings.push_back("value '" + system.value(i).name +
                                              "' missing from reply; defaulted to 0");
                result.provenance[i] = Provenance::llm_irrelevant;
            }
        }
    }
    return result;
}

}  // namespace eavit
