#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eavit {

/// One value item: a name like "Security: societal" plus its
/// natural-language definition paragraph.
struct ValueDef {
    std::string name;
    std::string definition;
};

std::string normalize_value_name(std::string_view name);

/// Ordered registry of value definitions. Order is stable and defines
/// LabelVector index semantics.
class ValueSystem {
public:
    ValueSystem(std::string name, std::vector<ValueDef> values);

    /// Loads a UTF-8 JSON map of name -> list of definition strings,
    /// preserving key order. Multi-element lists are joined with a space.
    static ValueSystem from_json(const std::string& json_text, std::string name);
    static ValueSystem from_json_file(const std::filesystem::path& path);

    const std::string& name() const { return name_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<ValueDef>& values() const { return values_; }
    const ValueDef& value(std::size_t i) const { return values_.at(i); }

    /// Exact-name lookup.
    std::optional<std::size_t> index_of(std::string_view name) const;
    /// Lookup after case-folding and trailing-punctuation trimming.
    /// Full-name matches only, never substrings.
    std::optional<std::size_t> index_of_normalized(std::string_view name) const;

private:
    std::string name_;
    std::vector<ValueDef> values_;
    std::unordered_map<std::string, std::size_t> by_name_;
    std::unordered_map<std::string, std::size_t> by_norm_;
};

struct TextInstance {
    std::string id;
    std::string text;
    std::map<std::string, std::string> meta;
};

/// Per-value binary labels for one text, aligned to a ValueSystem's order.
class LabelVector {
public:
    LabelVector() = default;
    LabelVector(std::string system_name, std::vector<std::uint8_t> labels);
    static LabelVector zeros(const ValueSystem& system);

    std::size_t size() const { return labels_.size(); }
    const std::string& system_name() const { return system_name_; }
    std::uint8_t operator[](std::size_t i) const { return labels_.at(i); }
    void set(std::size_t i, bool positive) { labels_.at(i) = positive ? 1 : 0; }
    const std::vector<std::uint8_t>& raw() const { return labels_; }
    std::vector<std::size_t> positives() const;

    bool operator==(const LabelVector& other) const = default;

private:
    std::string system_name_;
    std::vector<std::uint8_t> labels_;
};

/// Canonical dataset record: one instance, its labels, optional per-value
/// explanations, and where it came from.
struct AnnotatedRecord {
    TextInstance instance;
    LabelVector labels;
    std::map<std::string, std::string> explanations;
    std::string source = "original";  // original | icl_generated | targeted_generated
};

/// `I am {stance} the opinion of {conclusion}, because {premise}.`
std::string render_plain_text(const std::string& stance, const std::string& conclusion,
                              const std::string& premise);

struct ImportReport {
    std::vector<std::string> arguments_only;  // ids present only in the arguments table
    std::vector<std::string> labels_only;     // ids present only in the labels table
};

/// Touché-style TSV importer: arguments table (Argument ID, Conclusion,
/// Stance, Premise) joined with a labels table (Argument ID + one binary
/// column per value name). Rows present in only one table are reported,
/// not silently dropped.
std::vector<AnnotatedRecord> import_touche(const std::filesystem::path& arguments_tsv,
                                           const std::filesystem::path& labels_tsv,
                                           const ValueSystem& system,
                                           ImportReport* report = nullptr);

/// Line-delimited canonical dataset format.
std::vector<AnnotatedRecord> read_dataset(const std::filesystem::path& path,
                                          const ValueSystem& system);
void write_dataset(const std::filesystem::path& path,
                   const std::vector<AnnotatedRecord>& records, const ValueSystem& system);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace eavit
