#pragma once

#include <map>
#include <string>
#include <vector>

#include "eavit/gateway.hpp"
#include "eavit/prompt_kit.hpp"
#include "eavit/value_core.hpp"

namespace eavit {

/// One parsed detector output: labels aligned to the system, captured
/// explanations for positive values, the raw response, and parse warnings.
/// Parse warnings are first-class signal — detector output quality drives
/// candidate-set quality.
struct DetectorSample {
    LabelVector labels;
    std::map<std::string, std::string> explanations;
    std::string raw;
    std::vector<std::string> warnings;
    TokenUsage usage;
};

struct SamplingConfig {
    int samples = 5;  // L
    double temperature = 0.7;
    std::string seed_policy = "sample-index";
    std::string model = "value-detector";
    int max_output_tokens = 512;
    /// Prepended to each sample's tag; lets repeated runs of one prompt
    /// coexist in a replay store.
    std::string sample_tag_prefix;
};

/// Per-value relevance probabilities from L-fold sampling; each entry is an
/// exact multiple of 1/L.
struct RelevanceEstimate {
    std::vector<double> probs;
    int samples_used = 0;
};

/// Splits numbered "(k) Name. Explanation: text;" entries out of arbitrary
/// model text. Never fatal: unparseable input yields the all-zero vector
/// plus a warning.
DetectorSample parse_detector_response(const std::string& raw, const ValueSystem& system);

/// Issues L independent completions of one rendered detector prompt, with
/// sample_tag = sample index so cached samples of one prompt coexist.
std::vector<DetectorSample> sample_detector(ChatBackend& backend, const ValueSystem& system,
                                            const TemplateLibrary& templates,
                                            const std::string& text,
                                            const SamplingConfig& config);

/// probs[i] = (#samples labeling value i positive) / L.
RelevanceEstimate aggregate(const std::vector<DetectorSample>& samples);

}  // namespace eavit
