#include "eavit/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <regex>
#include <stdexcept>

#include "eavit/detector.hpp"
#include "json.hpp"

namespace eavit {

namespace {

std::vector<std::string> lower_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    // Two-row DP over token sequences.
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

double rouge_l(std::string_view a, std::string_view b) {
    auto ta = lower_tokens(a);
    auto tb = lower_tokens(b);
    if (ta.empty() || tb.empty()) return 0.0;
    double lcs = static_cast<double>(lcs_length(ta, tb));
    if (lcs == 0.0) return 0.0;
    double precision = lcs / static_cast<double>(tb.size());
    double recall = lcs / static_cast<double>(ta.size());
    return 2.0 * precision * recall / (precision + recall);
}

DedupResult dedup_filter(const std::vector<AnnotatedRecord>& records,
                         const std::vector<std::string>& corpus, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw std::invalid_argument("dedup threshold must lie in (0, 1]");
    DedupResult result;
    for (const auto& rec : records) {
        bool duplicate = false;
        for (const auto& text : corpus) {
            if (rouge_l(rec.instance.text, text) > threshold) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            for (const auto& kept : result.kept) {
                if (rouge_l(rec.instance.text, kept.instance.text) > threshold) {
                    duplicate = true;
                    break;
                }
            }
        }
        (duplicate ? result.dropped : result.kept).push_back(rec);
    }
    return result;
}

std::vector<std::string> least_frequent_values(const std::vector<AnnotatedRecord>& records,
                                               const ValueSystem& system, std::size_t k) {
    if (k > system.size()) throw std::invalid_argument("k exceeds system size");
    std::vector<std::size_t> counts(system.size(), 0);
    for (const auto& rec : records)
        for (auto i : rec.labels.positives()) ++counts[i];
    std::vector<std::size_t> order(system.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return counts[a] < counts[b]; });
    std::vector<std::string> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(system.value(order[i]).name);
    return out;
}

std::vector<AnnotatedRecord> augment_explanations(ChatBackend& backend, const ValueSystem& system,
                                                  const TemplateLibrary& templates,
                                                  std::vector<AnnotatedRecord> records,
                                                  const AugmentConfig& config,
                                                  AugmentReport* report) {
    AugmentReport local;
    for (auto& rec : records) {
        bool failed = false;
        for (auto i : rec.labels.positives()) {
            const std::string& name = system.value(i).name;
            if (rec.explanations.count(name)) continue;
            ChatRequest req;
            req.model = config.model;
            req.messages = {
                {Role::user, templates.explanation_prompt(system.value(i), rec.instance.text)}};
            req.temperature = config.temperature;
            req.max_output_tokens = config.max_output_tokens;
            try {
                ChatExchange ex = backend.complete(req);
                ++local.calls;
                std::string reply = trim(ex.response_text);
                if (count_tokens(reply) > config.length_cap_tokens) ++local.flagged_long;
                rec.explanations[name] = reply;
            } catch (const std::exception&) {
                ++local.calls;
                failed = true;
                break;
            }
        }
        if (failed) ++local.skipped_records;
    }
    if (report) *report = local;
    return records;
}

namespace {

// One "TEXT - (1) Value. Explanation: ...;" block into a record; returns
// false with a reason category on any mechanical-filter failure.
bool parse_generated_block(const std::string& block, const ValueSystem& system,
                           AnnotatedRecord& out, GenReport& report) {
    std::size_t split = block.find(" - (");
    if (split == std::string::npos) split = block.find("- (");
    if (split == std::string::npos) {
        ++report.dropped_parse;
        return false;
    }
    std::string text = trim(block.substr(0, split));
    std::string labels_part = block.substr(block.find('(', split));
    if (text.empty()) {
        ++report.dropped_empty;
        return false;
    }
    DetectorSample parsed = parse_detector_response(labels_part, system);
    for (const auto& w : parsed.warnings) {
        if (w.rfind("unmatched value name", 0) == 0) {
            ++report.dropped_roster;
            return false;
        }
    }
    if (parsed.labels.positives().empty()) {
        ++report.dropped_parse;
        return false;
    }
    out.instance.text = std::move(text);
    out.labels = parsed.labels;
    out.explanations = parsed.explanations;
    return true;
}

std::vector<std::string> split_on_marker(const std::string& raw, const std::regex& marker) {
    std::vector<std::string> blocks;
    std::size_t prev = 0;
    bool first = true;
    for (auto it = std::sregex_iterator(raw.begin(), raw.end(), marker);
         it != std::sregex_iterator(); ++it) {
        auto pos = static_cast<std::size_t>(it->position());
        if (first) {
            if (trim(raw.substr(0, pos)).empty()) {
                first = false;
                prev = pos + it->length();
                continue;
            }
        }
        blocks.push_back(raw.substr(prev, pos - prev));
        prev = pos + it->length();
        first = false;
    }
    blocks.push_back(raw.substr(prev));
    return blocks;
}

}  // namespace

std::vector<AnnotatedRecord> generate_batch(ChatBackend& backend, const TemplateLibrary& templates,
                                            const ValueSystem& system,
                                            const std::vector<AnnotatedRecord>& seed_records,
                                            const GenConfig& config, GenReport* report) {
    GenReport local;
    for (const auto& rec : seed_records)
        for (auto i : rec.labels.positives()) ++local.counts_before[system.value(i).name];
    local.counts_after = local.counts_before;

    std::vector<ValueDef> targets;
    if (config.kind == GenKind::targeted) {
        if (config.target_values.empty())
            throw std::invalid_argument("targeted generation requires at least one target value");
        for (const auto& name : config.target_values) {
            auto idx = system.index_of(name);
            if (!idx) throw std::invalid_argument("target value '" + name + "' not in system");
            targets.push_back(system.value(*idx));
        }
    } else if (seed_records.size() < 8) {
        throw std::invalid_argument("ICL generation requires at least 8 seed records");
    }

    std::vector<AnnotatedRecord> generated;
    std::size_t slate_offset = config.seed % std::max<std::size_t>(seed_records.size(), 1);
    static const std::regex data_marker(R"(DATA\s+\d+\s*:)");
    static const std::regex text_marker(R"(Text\s*[-:])");

    while (generated.size() < config.count && local.calls < config.call_budget) {
        ChatRequest req;
        req.model = config.model;
        req.temperature = config.temperature;
        req.max_output_tokens = config.max_output_tokens;
        if (config.kind == GenKind::icl) {
            // Rotate the slate so every seed record appears over a full run.
            std::vector<AnnotatedRecord> slate;
            for (std::size_t i = 0; i < 8; ++i)
                slate.push_back(seed_records[(slate_offset + i) % seed_records.size()]);
            slate_offset = (slate_offset + 8) % seed_records.size();
            req.messages = {{Role::user, templates.icl_datagen_prompt(slate, system)}};
        } else {
            req.messages = {{Role::user, templates.targeted_datagen_prompt(targets)}};
        }
        req.sample_tag = "gen-" + std::to_string(local.calls);

        ChatExchange ex;
        try {
            ex = backend.complete(req);
            ++local.calls;
        } catch (const std::exception&) {
            ++local.calls;
            continue;
        }

        if (config.kind == GenKind::icl) {
            for (const auto& block : split_on_marker(ex.response_text, data_marker)) {
                if (generated.size() >= config.count) break;
                if (trim(block).empty()) continue;
                AnnotatedRecord rec{{}, LabelVector::zeros(system), {}, "icl_generated"};
                if (!parse_generated_block(block, system, rec, local)) continue;
                rec.instance.id = "gen-icl-" + std::to_string(local.kept);
                ++local.kept;
                for (auto i : rec.labels.positives()) ++local.counts_after[system.value(i).name];
                generated.push_back(std::move(rec));
            }
        } else {
            for (const auto& block : split_on_marker(ex.response_text, text_marker)) {
                if (generated.size() >= config.count) break;
                std::string body = trim(block);
                if (body.empty()) continue;
                std::string text = body;
                std::string explanation;
                std::size_t epos = body.find("Explanation:");
                if (epos != std::string::npos) {
                    text = trim(body.substr(0, epos));
                    explanation = trim(body.substr(epos + 12));
                }
                if (text.empty()) {
                    ++local.dropped_empty;
                    continue;
                }
                AnnotatedRecord rec{{}, LabelVector::zeros(system), {}, "targeted_generated"};
                rec.instance.id = "gen-targeted-" + std::to_string(local.kept);
                rec.instance.text = std::move(text);
                for (const auto& t : targets) {
                    rec.labels.set(*system.index_of(t.name), true);
                    rec.explanations[t.name] =
                        explanation.empty() ? "Generated for target value " + t.name : explanation;
                }
                ++local.kept;
                for (auto i : rec.labels.positives()) ++local.counts_after[system.value(i).name];
                generated.push_back(std::move(rec));
            }
        }
    }
    if (report) *report = local;
    return generated;
}

std::vector<TrainingRecord> emit_alpaca(const std::vector<AnnotatedRecord>& records,
                                        const ValueSystem& system,
                                        const TemplateLibrary& templates,
                                        bool include_reflection) {
    std::vector<TrainingRecord> out;
    if (include_reflection) {
        for (const auto& v : system.values()) {
            ReflectionRecordText r = templates.reflection_record(v);
            out.push_back({r.instruction, r.input, r.output});
        }
    }
    std::string instruction = templates.detector_instruction(system);
    for (const auto& rec : records) {
        std::string response = format_labeled_response(rec, system);
        if (response.empty()) response = "No relevant values.";
        out.push_back({instruction, rec.instance.text, std::move(response)});
    }
    return out;
}

void write_alpaca_json(const std::filesystem::path& path,
                       const std::vector<TrainingRecord>& records) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& r : records)
        doc.push_back({{"instruction", r.instruction}, {"input", r.input}, {"output", r.output}});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path.string());
    out << doc.dump(2) << '\n';
}

}  // namespace eavit
