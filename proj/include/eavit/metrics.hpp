#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eavit/pipeline.hpp"
#include "eavit/value_core.hpp"

namespace eavit {

struct EvalReport {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::map<std::string, double> per_value_f1;
    std::map<std::string, int> support;  // gold positives per value
    double mean_prompt_tokens = 0.0;
    double mean_completion_tokens = 0.0;
};

/// Micro cell-level accuracy: fraction of correct binary decisions over all
/// (instance, value) cells.
double accuracy(const std::vector<LabelVector>& preds, const std::vector<LabelVector>& golds);

struct MacroF1Result {
    double macro = 0.0;
    std::map<std::string, double> per_value;
};

/// Per value: F1 = 2TP/(2TP+FP+FN) on the positive label, 0 when the
/// denominator is 0; macro = unweighted mean over values.
MacroF1Result macro_f1(const std::vector<LabelVector>& preds,
                       const std::vector<LabelVector>& golds, const ValueSystem& system);

struct ClassDistribution {
    std::map<std::string, int> counts;          // positive count per value
    std::optional<double> max_min_ratio;        // undefined when a count is 0 or dataset empty
};

ClassDistribution class_distribution(const std::vector<LabelVector>& labelsets,
                                     const ValueSystem& system);

/// Per-coordinate population variance across sample vectors, averaged over
/// coordinates. Requires at least two samples of equal length.
double consistency_variance(const std::vector<std::vector<double>>& samples);

struct TokenReport {
    double mean_llm_tokens = 0.0;          // prompt + completion, online-LLM calls only
    double mean_llm_prompt_tokens = 0.0;   // prompt-only breakdown
    double mean_detector_tokens = 0.0;     // reported separately
    long total_llm_tokens = 0;
    long total_detector_tokens = 0;
};

TokenReport token_report(const std::vector<FinalResult>& results);

EvalReport evaluate(const std::vector<FinalResult>& results,
                    const std::vector<LabelVector>& golds, const ValueSystem& system);

}  // namespace eavit
