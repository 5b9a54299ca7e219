#include "eavit/persona.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace eavit {

using ordered_json = nlohmann::ordered_json;

double wvs_score(int answer) {
    if (answer < 1 || answer > 6)
        throw std::invalid_argument("WVS answer must be in 1..6, got " + std::to_string(answer));
    return std::max((4.5 - answer) / 3.5, 0.0);
}

Level1Map::Level1Map(std::vector<std::string> level1_names,
                     std::map<std::string, std::string> level2_to_level1)
    : level1_names_(std::move(level1_names)), level2_to_level1_(std::move(level2_to_level1)) {
    for (std::size_t i = 0; i < level1_names_.size(); ++i) index_[level1_names_[i]] = i;
    for (const auto& [l2, l1] : level2_to_level1_)
        if (!index_.count(l1))
            throw std::invalid_argument("level-1 value '" + l1 + "' not in level-1 roster");
}

Level1Map Level1Map::from_json_file(const std::filesystem::path& path) {
    ordered_json doc = ordered_json::parse(read_text_file(path));
    std::vector<std::string> names;
    for (const auto& n : doc.at("level1")) names.push_back(n.get<std::string>());
    std::map<std::string, std::string> mapping;
    for (const auto& [k, v] : doc.at("map").items()) mapping[k] = v.get<std::string>();
    return Level1Map(std::move(names), std::move(mapping));
}

std::size_t Level1Map::level1_index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("unknown level-1 value '" + name + "'");
    return it->second;
}

std::vector<std::uint8_t> Level1Map::map_labels(const LabelVector& labels,
                                                const ValueSystem& system) const {
    if (labels.size() != system.size())
        throw std::invalid_argument("label vector does not match system size");
    std::vector<std::uint8_t> out(level1_names_.size(), 0);
    for (auto i : labels.positives()) {
        auto it = level2_to_level1_.find(system.value(i).name);
        if (it == level2_to_level1_.end())
            throw std::invalid_argument("value '" + system.value(i).name +
                                        "' has no level-1 parent in the map");
        out[level1_index(it->second)] = 1;
    }
    return out;
}

std::vector<std::uint8_t> aggregate_individual(
    const std::vector<std::vector<std::uint8_t>>& per_text_level1_labels, int min_texts) {
    if (per_text_level1_labels.empty())
        throw std::invalid_argument("aggregation requires at least one text result");
    const std::size_t dims = per_text_level1_labels.front().size();
    std::vector<int> counts(dims, 0);
    for (const auto& labels : per_text_level1_labels) {
        if (labels.size() != dims) throw std::invalid_argument("inconsistent label dimensions");
        for (std::size_t i = 0; i < dims; ++i) counts[i] += labels[i];
    }
    std::vector<std::uint8_t> out(dims, 0);
    for (std::size_t i = 0; i < dims; ++i) out[i] = counts[i] >= min_texts ? 1 : 0;
    return out;
}

PersonaAccuracy persona_accuracy(const std::vector<std::uint8_t>& s_pred,
                                 const std::vector<double>& s_real) {
    if (s_pred.size() != s_real.size())
        throw std::invalid_argument("prediction/ground-truth coverage mismatch");
    PersonaAccuracy acc;
    acc.correct.reserve(s_pred.size());
    for (std::size_t i = 0; i < s_pred.size(); ++i) {
        bool ok = std::abs(static_cast<double>(s_pred[i]) - s_real[i]) < 0.5;  // strict
        acc.correct.push_back(ok);
        acc.mean += ok;
    }
    if (!s_pred.empty()) acc.mean /= static_cast<double>(s_pred.size());
    return acc;
}

std::vector<WvsQuestion> load_wvs_questions(const std::filesystem::path& path) {
    ordered_json doc = ordered_json::parse(read_text_file(path));
    std::vector<WvsQuestion> out;
    for (const auto& q : doc.at("questions"))
        out.push_back({q.at("id").get<std::string>(), q.at("value").get<std::string>(),
                       q.at("text").get<std::string>()});
    return out;
}

std::vector<std::string> load_persona_topics(const std::filesystem::path& path) {
    ordered_json doc = ordered_json::parse(read_text_file(path));
    std::vector<std::string> out;
    for (const auto& t : doc) out.push_back(t.get<std::string>());
    return out;
}

std::vector<double> wvs_scores_for_answers(const std::map<std::string, int>& answers,
                                           const std::vector<WvsQuestion>& questions,
                                           const Level1Map& map) {
    std::vector<double> scores(map.level1_names().size(), 0.0);
    std::vector<bool> covered(scores.size(), false);
    for (const auto& q : questions) {
        auto it = answers.find(q.id);
        if (it == answers.end())
            throw std::invalid_argument("missing answer for question " + q.id);
        std::size_t idx = map.level1_index(q.value);
        scores[idx] = wvs_score(it->second);
        covered[idx] = true;
    }
    for (std::size_t i = 0; i < covered.size(); ++i)
        if (!covered[i])
            throw std::invalid_argument("no question covers value '" + map.level1_names()[i] + "'");
    return scores;
}

}  // namespace eavit
