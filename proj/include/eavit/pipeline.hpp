#pragma once

#include <map>
#include <string>
#include <vector>

#include "eavit/detector.hpp"
#include "eavit/gateway.hpp"
#include "eavit/prompt_kit.hpp"
#include "eavit/value_core.hpp"

namespace eavit {

struct PartitionConfig {
    double p_low = 0.2;
    double p_high = 0.8;
    void validate() const;
};

/// Disjoint cover of the value indices by relevance probability.
struct CandidatePartition {
    std::vector<std::size_t> confirmed;   // prob >  p_high
    std::vector<std::size_t> candidates;  // p_low <= prob <= p_high
    std::vector<std::size_t> rejected;    // prob <  p_low
};

enum class Provenance { detector_confirmed, llm_relevant, llm_irrelevant, detector_rejected };

struct FinalResult {
    LabelVector labels;
    std::vector<Provenance> provenance;
    TokenUsage usage_total;     // all exchanges, detector + final
    TokenUsage llm_usage;       // online-LLM calls only (final identification)
    TokenUsage detector_usage;  // detector sampling calls
    int candidate_count = 0;
    std::vector<std::string> warnings;
};

CandidatePartition partition(const RelevanceEstimate& estimate, const PartitionConfig& config);

enum class Verdict { relevant, irrelevant, unresolved };

/// Matches "Name - Relevant|Irrelevant" lines and the chain-of-thought
/// closing form "I identify <Name> as 'Relevant'", case-insensitively.
std::map<std::string, Verdict> parse_final_response(const std::string& raw,
                                                    const std::vector<ValueDef>& candidates);

struct FinalStageConfig {
    std::string model = "gpt-4o-mini";
    double temperature = 0.0;
    int max_output_tokens = 1024;
    bool cot = false;
};

/// Issues the single final-identification call (none when no candidates) and
/// merges verdicts: confirmed -> 1, Relevant -> 1, Irrelevant -> 0,
/// rejected -> 0. Candidates missing from the reply default to 0 with a
/// warning.
FinalResult finalize(ChatBackend& backend, const ValueSystem& system,
                     const TemplateLibrary& templates, const std::string& text,
                     const CandidatePartition& part, const FinalStageConfig& config);

struct PipelineConfig {
    SamplingConfig sampling;
    PartitionConfig thresholds;
    FinalStageConfig final_stage;
};

/// The end-to-end cascade: sample_detector -> aggregate -> partition ->
/// finalize, with usage summed across all exchanges.
FinalResult identify(ChatBackend& detector_backend, ChatBackend& llm_backend,
                     const ValueSystem& system, const TemplateLibrary& templates,
                     const std::string& text, const PipelineConfig& config);

std::string provenance_name(Provenance p);

}  // namespace eavit
