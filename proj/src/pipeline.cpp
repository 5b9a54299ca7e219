#include "eavit/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace eavit {

void PartitionConfig::validate() const {
    if (!(0.0 < p_low && p_low < p_high && p_high < 1.0))
        throw std::invalid_argument("thresholds must satisfy 0 < p_low < p_high < 1, got p_low=" +
                                    std::to_string(p_low) + ", p_high=" + std::to_string(p_high));
}

CandidatePartition partition(const RelevanceEstimate& estimate, const PartitionConfig& config) {
    config.validate();
    CandidatePartition part;
    for (std::size_t i = 0; i < estimate.probs.size(); ++i) {
        double p = estimate.probs[i];
        if (p > config.p_high)
            part.confirmed.push_back(i);
        else if (p >= config.p_low)
            part.candidates.push_back(i);
        else
            part.rejected.push_back(i);
    }
    return part;
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// First verdict token at or after `pos`, stopping at end of line.
Verdict verdict_after(const std::string& text, std::size_t pos) {
    std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    std::size_t irr = line.find("irrelevant");
    std::size_t rel = line.find("relevant");
    if (irr != std::string::npos && irr <= rel) return Verdict::irrelevant;
    if (rel != std::string::npos) {
        // "relevant" found first; make sure it is not the tail of "irrelevant"
        if (rel >= 2 && line.compare(rel - 2, 2, "ir") == 0) return Verdict::irrelevant;
        return Verdict::relevant;
    }
    if (irr != std::string::npos) return Verdict::irrelevant;
    return Verdict::unresolved;
}

}  // namespace

std::map<std::string, Verdict> parse_final_response(const std::string& raw,
                                                    const std::vector<ValueDef>& candidates) {
    std::string haystack = lower(raw);
    std::map<std::string, Verdict> verdicts;
    for (const auto& value : candidates) {
        std::string needle = lower(value.name);
        Verdict verdict = Verdict::unresolved;
        std::size_t pos = 0;
        while ((pos = haystack.find(needle, pos)) != std::string::npos) {
            Verdict v = verdict_after(haystack, pos + needle.size());
            if (v != Verdict::unresolved) verdict = v;  // CoT: last verdict wins
            pos += needle.size();
        }
        verdicts[value.name] = verdict;
    }
    return verdicts;
}

std::string provenance_name(Provenance p) {
    switch (p) {
        case Provenance::detector_confirmed: return "detector_confirmed";
        case Provenance::llm_relevant: return "llm_relevant";
        case Provenance::llm_irrelevant: return "llm_irrelevant";
        case Provenance::detector_rejected: return "detector_rejected";
    }
    throw std::logic_error("bad provenance");
}

FinalResult finalize(ChatBackend& backend, const ValueSystem& system,
                     const TemplateLibrary& templates, const std::string& text,
                     const CandidatePartition& part, const FinalStageConfig& config) {
    FinalResult result{LabelVector::zeros(system),
                       std::vector<Provenance>(system.size(), Provenance::detector_rejected),
                       {}, {}, {}, static_cast<int>(part.candidates.size()), {}};
    for (auto i : part.confirmed) {
        result.labels.set(i, true);
        result.provenance[i] = Provenance::detector_confirmed;
    }
    if (part.candidates.empty()) return result;  // no LLM call

    std::vector<ValueDef> candidates;
    candidates.reserve(part.candidates.size());
    for (auto i : part.candidates) candidates.push_back(system.value(i));

    ChatRequest req;
    req.model = config.model;
    req.messages = {{Role::user, templates.final_prompt(candidates, text, config.cot)}};
    req.temperature = config.temperature;
    req.max_output_tokens = config.max_output_tokens;
    ChatExchange ex = backend.complete(req);
    result.llm_usage += ex.usage;
    result.usage_total += ex.usage;

    auto verdicts = parse_final_response(ex.response_text, candidates);
    for (auto i : part.candidates) {
        Verdict v = verdicts.at(system.value(i).name);
        if (v == Verdict::relevant) {
            result.labels.set(i, true);
            result.provenance[i] = Provenance::llm_relevant;
        } else {
            if (v == Verdict::unresolved)
                result.warnings.push_back("candidate '" + system.value(i).name +
                                          "' missing from final reply; defaulted to 0");
            result.provenance[i] = Provenance::llm_irrelevant;
        }
    }
    return result;
}

FinalResult identify(ChatBackend& detector_backend, ChatBackend& llm_backend,
                     const ValueSystem& system, const TemplateLibrary& templates,
                     const std::string& text, const PipelineConfig& config) {
    config.thresholds.validate();
    std::vector<DetectorSample> samples;
    try {
        samples = sample_detector(detector_backend, system, templates, text, config.sampling);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("detector stage: ") + e.what());
    }
    RelevanceEstimate estimate = aggregate(samples);
    CandidatePartition part = partition(estimate, config.thresholds);
    FinalResult result;
    try {
        result = finalize(llm_backend, system, templates, text, part, config.final_stage);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("final stage: ") + e.what());
    }
    for (const auto& s : samples) {
        result.detector_usage += s.usage;
        result.usage_total += s.usage;
        for (const auto& w : s.warnings) result.warnings.push_back("detector: " + w);
    }
    return result;
}

}  // namespace eavit
