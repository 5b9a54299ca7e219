#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eavit/value_core.hpp"

namespace eavit {

enum class PromptKind {
    detector_instruction,
    final_identify,
    final_identify_cot,
    explanation_gen,
    icl_datagen,
    targeted_datagen,
    reflection,
    baseline_batch,  // shares the final-identification template
};

struct ReflectionRecordText {
    std::string instruction;
    std::string input;
    std::string output;
};

/// Fills `{slot}` placeholders. Throws if a slot has no value or a value
/// goes unused. Single pass: payload text is never re-expanded.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& slots);

/// Loads the versioned template files once and renders every prompt family
/// from typed inputs. Rendering is pure.
class TemplateLibrary {
public:
    static TemplateLibrary load(const std::filesystem::path& templates_dir);

    const std::string& version() const { return version_; }

    std::string detector_prompt(const ValueSystem& system, std::string_view text) const;
    /// Instruction body alone, for Alpaca training-record emission.
    std::string detector_instruction(const ValueSystem& system) const;

    std::string final_prompt(const std::vector<ValueDef>& candidates, std::string_view text,
                             bool cot) const;
    std::string baseline_prompt(const std::vector<ValueDef>& values, std::string_view text,
                                bool cot) const;
    std::string explanation_prompt(const ValueDef& value, std::string_view text) const;

    /// ICL data generation requires exactly 8 worked examples.
    std::string icl_datagen_prompt(const std::vector<AnnotatedRecord>& examples,
                                   const ValueSystem& system) const;
    std::string targeted_datagen_prompt(const std::vector<ValueDef>& targets) const;

    ReflectionRecordText reflection_record(const ValueDef& value) const;

    std::string wrap_alpaca(const std::string& instruction, const std::string& input) const;

private:
    std::string version_;
    std::map<std::string, std::string> files_;
    const std::string& file(const std::string& name) const;
};

/// Data directory resolution: EAVIT_DATA_DIR environment variable, else the
/// compiled-in default.
std::filesystem::path default_data_dir();

/// Formats the positive labels of one record as numbered
/// "(k) Name. Explanation: ...;" lines in system order.
std::string format_labeled_response(const AnnotatedRecord& record, const ValueSystem& system);

}  // namespace eavit
