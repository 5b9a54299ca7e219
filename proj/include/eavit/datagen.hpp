#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eavit/gateway.hpp"
#include "eavit/prompt_kit.hpp"
#include "eavit/value_core.hpp"

namespace eavit {

/// Alpaca-format training record.
struct TrainingRecord {
    std::string instruction;
    std::string input;
    std::string output;
};

/// ROUGE-L F1 between two strings: lowercase, whitespace tokenization,
/// LCS length via dynamic programming; empty vs anything is 0.
double rouge_l(std::string_view a, std::string_view b);

struct DedupResult {
    std::vector<AnnotatedRecord> kept;
    std::vector<AnnotatedRecord> dropped;
};

/// Greedy in arrival order: a record is dropped iff its text scores above
/// the threshold against any corpus text or any earlier kept record.
DedupResult dedup_filter(const std::vector<AnnotatedRecord>& records,
                         const std::vector<std::string>& corpus, double threshold = 0.7);

/// Values sorted ascending by positive-label count, ties broken by system
/// order; first k names returned.
std::vector<std::string> least_frequent_values(const std::vector<AnnotatedRecord>& records,
                                               const ValueSystem& system, std::size_t k);

struct AugmentReport {
    int calls = 0;
    int skipped_records = 0;   // backend failure, run continued
    int flagged_long = 0;      // explanation over the ~20-token cap, kept
};

struct AugmentConfig {
    std::string model = "gpt-4o-mini";
    double temperature = 0.0;
    int max_output_tokens = 64;
    int length_cap_tokens = 20;
};

/// One explanation call per (record, positive value) still lacking one.
/// Already-explained records cost zero calls.
std::vector<AnnotatedRecord> augment_explanations(ChatBackend& backend, const ValueSystem& system,
                                                  const TemplateLibrary& templates,
                                                  std::vector<AnnotatedRecord> records,
                                                  const AugmentConfig& config,
                                                  AugmentReport* report = nullptr);

enum class GenKind { icl, targeted };

struct GenConfig {
    GenKind kind = GenKind::icl;
    std::size_t count = 10;    // kept records to aim for
    int call_budget = 100;
    unsigned seed = 0;         // drives ICL slate rotation
    std::string model = "gpt-4o-mini";
    double temperature = 0.7;
    int max_output_tokens = 1024;
    std::vector<std::string> target_values;  // targeted mode
};

struct GenReport {
    int calls = 0;
    int kept = 0;
    int dropped_parse = 0;
    int dropped_roster = 0;
    int dropped_empty = 0;
    std::map<std::string, int> counts_before;
    std::map<std::string, int> counts_after;
};

/// ICL or targeted data generation. ICL slates rotate across calls so every
/// seed record (and thus every value) appears in some slate over a full run.
/// Replies failing the mechanical filters (parse failure, empty text,
/// out-of-roster labels) are dropped and counted.
std::vector<AnnotatedRecord> generate_batch(ChatBackend& backend, const TemplateLibrary& templates,
                                            const ValueSystem& system,
                                            const std::vector<AnnotatedRecord>& seed_records,
                                            const GenConfig& config, GenReport* report = nullptr);

/// One detector-format Alpaca record per annotated record, plus (optionally)
/// one reflection record per system value. Reflections come first.
std::vector<TrainingRecord> emit_alpaca(const std::vector<AnnotatedRecord>& records,
                                        const ValueSystem& system,
                                        const TemplateLibrary& templates, bool include_reflection);

void write_alpaca_json(const std::filesystem::path& path,
                       const std::vector<TrainingRecord>& records);

}  // namespace eavit
