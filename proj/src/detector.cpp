#include "eavit/detector.hpp"

#include <regex>
#include <stdexcept>

namespace eavit {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

DetectorSample parse_detector_response(const std::string& raw, const ValueSystem& system) {
    DetectorSample sample{LabelVector::zeros(system), {}, raw, {}, {}};

    // Entries start at "(k)"; each runs until the next "(k+1)" marker.
    static const std::regex entry_start(R"(\(\d+\)\s*)");
    std::vector<std::pair<std::size_t, std::size_t>> spans;  // [begin, end) of entry bodies
    for (auto it = std::sregex_iterator(raw.begin(), raw.end(), entry_start);
         it != std::sregex_iterator(); ++it) {
        if (!spans.empty()) spans.back().second = static_cast<std::size_t>(it->position());
        spans.emplace_back(static_cast<std::size_t>(it->position() + it->length()), raw.size());
    }
    if (spans.empty()) {
        sample.warnings.push_back("no numbered entries found in detector response");
        return sample;
    }

    for (auto [begin, end] : spans) {
        std::string entry = raw.substr(begin, end - begin);
        std::string name_part;
        std::string explanation;
        std::size_t expl_pos = entry.find("Explanation:");
        if (expl_pos != std::string::npos) {
            name_part = entry.substr(0, expl_pos);
            explanation = trim(entry.substr(expl_pos + 12));
            while (!explanation.empty() &&
                   (explanation.back() == ';' || explanation.back() == '\n'))
                explanation.pop_back();
            explanation = trim(explanation);
        } else {
            name_part = entry;
        }
        // Name ends at the separator before "Explanation:" or at the entry's
        // own terminator; value names contain ':' but never '.' or ';'.
        std::size_t cut = name_part.find_first_of(".;\n");
        if (cut != std::string::npos) name_part = name_part.substr(0, cut);
        std::string name = trim(name_part);
        if (name.empty()) {
            sample.warnings.push_back("entry with empty value name");
            continue;
        }
        auto idx = system.index_of_normalized(name);
        if (!idx) {
            sample.warnings.push_back("unmatched value name '" + name + "'");
            continue;
        }
        if (sample.labels[*idx]) continue;  // duplicate mentions collapse to one
        sample.labels.set(*idx, true);
        if (!explanation.empty()) sample.explanations[system.value(*idx).name] = explanation;
    }
    return sample;
}

std::vector<DetectorSample> sample_detector(ChatBackend& backend, const ValueSystem& system,
                                            const TemplateLibrary& templates,
                                            const std::string& text,
                                            const SamplingConfig& config) {
    if (config.samples < 1) throw std::invalid_argument("sampling config requires L >= 1");
    std::string prompt = templates.detector_prompt(system, text);
    std::vector<DetectorSample> samples;
    samples.reserve(static_cast<std::size_t>(config.samples));
    for (int j = 0; j < config.samples; ++j) {
        ChatRequest req;
        req.model = config.model;
        req.messages = {{Role::user, prompt}};
        req.temperature = config.temperature;
        req.max_output_tokens = config.max_output_tokens;
        req.sample_tag = config.sample_tag_prefix + std::to_string(j);
        ChatExchange ex;
        try {
            ex = backend.complete(req);
        } catch (const std::exception& e) {
            throw std::runtime_error("detector sample " + std::to_string(j) +
                                     " failed: " + e.what());
        }
        DetectorSample sample = parse_detector_response(ex.response_text, system);
        sample.usage = ex.usage;
        samples.push_back(std::move(sample));
    }
    return samples;
}

RelevanceEstimate aggregate(const std::vector<DetectorSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("aggregate requires at least one sample");
    const std::size_t n = samples.front().labels.size();
    const std::string& system_name = samples.front().labels.system_name();
    for (const auto& s : samples)
        if (s.labels.size() != n || s.labels.system_name() != system_name)
            throw std::invalid_argument("aggregate: samples reference different value systems");
    RelevanceEstimate est;
    est.samples_used = static_cast<int>(samples.size());
    est.probs.assign(n, 0.0);
    for (const auto& s : samples)
        for (std::size_t i = 0; i < n; ++i) est.probs[i] += s.labels[i];
    for (auto& p : est.probs) p /= static_cast<double>(samples.size());
    return est;
}

}  // namespace eavit
