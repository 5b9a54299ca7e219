#pragma once

#include <optional>
#include <string>

#include "eavit/pipeline.hpp"

namespace eavit {

/// Pure-LLM comparison strategies: batch_size = system size gives single-step
/// prompting, 4 gives 5-step on a 20-value system, 1 gives sequential.
struct StrategyConfig {
    int batch_size = 20;
    bool cot = false;
    std::string model = "gpt-4o-mini";
    double temperature = 0.0;
    int max_output_tokens = 1024;
    /// When set, value order is shuffled before chunking (position-bias studies).
    std::optional<unsigned> shuffle_seed;
};

/// Chunks values in system order into ceil(n/batch_size) batches and issues
/// one call per batch; verdicts are concatenated into one LabelVector.
FinalResult run_strategy(ChatBackend& backend, const ValueSystem& system,
                         const TemplateLibrary& templates, const std::string& text,
                         const StrategyConfig& config);

}  // namespace eavit
