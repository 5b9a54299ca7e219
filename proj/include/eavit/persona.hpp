#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "eavit/value_core.hpp"

namespace eavit {

/// One World Values Survey answer: question v70..v79, answer code 1..6,
/// its mapped level-1 Schwartz value.
struct WvsAnswer {
    std::string question_id;
    int answer = 0;
    std::string mapped_value;
};

/// Questionnaire score: max((4.5 - answer) / 3.5, 0). Non-increasing in the
/// answer; exactly 0 for answers 5 and 6.
double wvs_score(int answer);

/// Level-2 (20) to level-1 (10) value mapping, shipped as data.
class Level1Map {
public:
    static Level1Map from_json_file(const std::filesystem::path& path);
    Level1Map(std::vector<std::string> level1_names,
              std::map<std::string, std::string> level2_to_level1);

    const std::vector<std::string>& level1_names() const { return level1_names_; }
    std::size_t level1_index(const std::string& name) const;

    /// Any positive level-2 child makes its level-1 parent positive.
    std::vector<std::uint8_t> map_labels(const LabelVector& labels,
                                         const ValueSystem& system) const;

private:
    std::vector<std::string> level1_names_;
    std::map<std::string, std::string> level2_to_level1_;
    std::map<std::string, std::size_t> index_;
};

/// Per-individual aggregation: a level-1 value is 1 iff at least
/// `min_texts` of the individual's texts mark it relevant.
std::vector<std::uint8_t> aggregate_individual(
    const std::vector<std::vector<std::uint8_t>>& per_text_level1_labels, int min_texts = 3);

struct PersonaAccuracy {
    std::vector<bool> correct;  // per value, |s_pred - s_real| < 0.5 strictly
    double mean = 0.0;
};

PersonaAccuracy persona_accuracy(const std::vector<std::uint8_t>& s_pred,
                                 const std::vector<double>& s_real);

struct WvsQuestion {
    std::string id;
    std::string value;  // level-1 value name
    std::string text;
};

std::vector<WvsQuestion> load_wvs_questions(const std::filesystem::path& path);
std::vector<std::string> load_persona_topics(const std::filesystem::path& path);

/// Per-individual answers file: JSON {"individual": ..., "answers": {"v70": 1, ...}}
/// records, one per line. Returns s_real in the Level1Map's value order.
std::vector<double> wvs_scores_for_answers(const std::map<std::string, int>& answers,
                                           const std::vector<WvsQuestion>& questions,
                                           const Level1Map& map);

}  // namespace eavit
