#include "eavit/prompt_kit.hpp"

#include <cstdlib>
#include <stdexcept>

namespace eavit {

#ifndef EAVIT_DEFAULT_DATA_DIR
#define EAVIT_DEFAULT_DATA_DIR ""
#endif

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("EAVIT_DATA_DIR")) return env;
    std::filesystem::path compiled = EAVIT_DEFAULT_DATA_DIR;
    if (!compiled.empty()) return compiled;
    return "data";
}

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& slots) {
    std::string out;
    out.reserve(tmpl.size());
    std::map<std::string, bool> used;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        char c = tmpl[i];
        if (c == '{') {
            std::size_t close = tmpl.find('}', i + 1);
            if (close == std::string_view::npos)
                throw std::runtime_error("unterminated slot in template");
            std::string name(tmpl.substr(i + 1, close - i - 1));
            auto it = slots.find(name);
            if (it == slots.end())
                throw std::runtime_error("no value provided for slot '" + name + "'");
            out += it->second;
            used[name] = true;
            i = close + 1;
        } else {
            out.push_back(c);
            ++i;
        }
    }
    for (const auto& [name, _] : slots)
        if (!used.count(name))
            throw std::runtime_error("template has no slot '" + name + "'");
    return out;
}

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& templates_dir) {
    static const char* kNames[] = {
        "detector_instruction", "alpaca_wrapper",   "final_identify",
        "final_identify_cot",   "explanation_gen",  "icl_datagen",
        "targeted_datagen",     "reflection_instruction", "reflection_input",
    };
    TemplateLibrary lib;
    for (const char* name : kNames) {
        auto path = templates_dir / (std::string(name) + ".txt");
        lib.files_[name] = read_text_file(path);
    }
    std::string version = read_text_file(templates_dir / "VERSION");
    while (!version.empty() && (version.back() == '\n' || version.back() == '\r'))
        version.pop_back();
    lib.version_ = version;
    return lib;
}

const std::string& TemplateLibrary::file(const std::string& name) const {
    auto it = files_.find(name);
    if (it == files_.end()) throw std::logic_error("unknown template '" + name + "'");
    return it->second;
}

namespace {

std::string strip_trailing_newline(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

std::string quoted_roster(const ValueSystem& system) {
    std::string roster;
    for (const auto& v : system.values()) {
        if (!roster.empty()) roster += ", ";
        roster += "'" + v.name + "'";
    }
    return roster;
}

std::string definitions_block(const std::vector<ValueDef>& values) {
    std::string block;
    for (const auto& v : values) {
        if (!block.empty()) block += ",\n                ";
        block += v.name + ", Definition: " + v.definition;
    }
    return block;
}

}  // namespace

std::string TemplateLibrary::detector_instruction(const ValueSystem& system) const {
    return strip_trailing_newline(
        render_template(file("detector_instruction"),
                        {{"value_count", std::to_string(system.size())},
                         {"value_roster", quoted_roster(system)}}));
}

std::string TemplateLibrary::wrap_alpaca(const std::string& instruction,
                                         const std::string& input) const {
    return render_template(file("alpaca_wrapper"), {{"instruction", instruction}, {"input", input}});
}

std::string TemplateLibrary::detector_prompt(const ValueSystem& system,
                                             std::string_view text) const {
    if (text.empty()) throw std::invalid_argument("detector prompt requires nonempty text");
    return wrap_alpaca(detector_instruction(system), std::string(text));
}

std::string TemplateLibrary::final_prompt(const std::vector<ValueDef>& candidates,
                                          std::string_view text, bool cot) const {
    if (candidates.empty()) throw std::invalid_argument("final prompt requires candidates");
    if (text.empty()) throw std::invalid_argument("final prompt requires nonempty text");
    return render_template(file(cot ? "final_identify_cot" : "final_identify"),
                           {{"value_definitions", definitions_block(candidates)},
                            {"input_text", std::string(text)}});
}

std::string TemplateLibrary::baseline_prompt(const std::vector<ValueDef>& values,
                                             std::string_view text, bool cot) const {
    // Baselines and final identification share the template by design.
    return final_prompt(values, text, cot);
}

std::string TemplateLibrary::explanation_prompt(const ValueDef& value,
                                                std::string_view text) const {
    if (text.empty()) throw std::invalid_argument("explanation prompt requires nonempty text");
    return render_template(file("explanation_gen"), {{"value_name", value.name},
                                                     {"value_definition", value.definition},
                                                     {"input_text", std::string(text)}});
}

std::string format_labeled_response(const AnnotatedRecord& record, const ValueSystem& system) {
    std::string out;
    int k = 0;
    for (auto i : record.labels.positives()) {
        const std::string& name = system.value(i).name;
        auto it = record.explanations.find(name);
        if (it == record.explanations.end())
            throw std::runtime_error("record '" + record.instance.id +
                                     "' lacks an explanation for positive value '" + name + "'");
        if (!out.empty()) out += '\n';
        out += "(" + std::to_string(++k) + ") " + name + ". Explanation: " + it->second + ";";
    }
    return out;
}

std::string TemplateLibrary::icl_datagen_prompt(const std::vector<AnnotatedRecord>& examples,
                                                const ValueSystem& system) const {
    constexpr std::size_t kSlateSize = 8;
    if (examples.size() != kSlateSize)
        throw std::invalid_argument("ICL data generation takes exactly 8 examples, got " +
                                    std::to_string(examples.size()));
    std::string block;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        std::string labels = format_labeled_response(examples[i], system);
        for (auto& c : labels)
            if (c == '\n') c = ' ';
        block += "DATA " + std::to_string(i + 1) + ": " + examples[i].instance.text + " - " +
                 labels + "\n";
    }
    return render_template(file("icl_datagen"),
                           {{"examples", block}, {"next_index", std::to_string(kSlateSize + 1)}});
}

std::string TemplateLibrary::targeted_datagen_prompt(const std::vector<ValueDef>& targets) const {
    if (targets.empty()) throw std::invalid_argument("targeted generation requires target values");
    return render_template(file("targeted_datagen"),
                           {{"target_definitions", definitions_block(targets)}});
}

ReflectionRecordText TemplateLibrary::reflection_record(const ValueDef& value) const {
    ReflectionRecordText rec;
    rec.instruction = strip_trailing_newline(file("reflection_instruction"));
    rec.input = strip_trailing_newline(
        render_template(file("reflection_input"), {{"value_name", value.name}}));
    rec.output = value.definition;
    return rec;
}

}  // namespace eavit
