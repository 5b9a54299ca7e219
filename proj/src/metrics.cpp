#include "eavit/metrics.hpp"

#include <stdexcept>

namespace eavit {

namespace {

void check_aligned(const std::vector<LabelVector>& preds, const std::vector<LabelVector>& golds) {
    if (preds.size() != golds.size())
        throw std::invalid_argument("prediction/gold counts differ: " +
                                    std::to_string(preds.size()) + " vs " +
                                    std::to_string(golds.size()));
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i].size() != golds[i].size())
            throw std::invalid_argument("label length mismatch at instance " + std::to_string(i));
}

}  // namespace

double accuracy(const std::vector<LabelVector>& preds, const std::vector<LabelVector>& golds) {
    check_aligned(preds, golds);
    long correct = 0, total = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t j = 0; j < preds[i].size(); ++j) {
            correct += preds[i][j] == golds[i][j];
            ++total;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

MacroF1Result macro_f1(const std::vector<LabelVector>& preds,
                       const std::vector<LabelVector>& golds, const ValueSystem& system) {
    check_aligned(preds, golds);
    MacroF1Result result;
    for (std::size_t v = 0; v < system.size(); ++v) {
        long tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            bool p = preds[i][v], g = golds[i][v];
            tp += p && g;
            fp += p && !g;
            fn += !p && g;
        }
        long denom = 2 * tp + fp + fn;
        double f1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
        result.per_value[system.value(v).name] = f1;
        result.macro += f1;
    }
    result.macro /= static_cast<double>(system.size());
    return result;
}

ClassDistribution class_distribution(const std::vector<LabelVector>& labelsets,
                                     const ValueSystem& system) {
    ClassDistribution dist;
    std::vector<int> counts(system.size(), 0);
    for (const auto& labels : labelsets)
        for (std::size_t v = 0; v < system.size(); ++v) counts[v] += labels[v];
    int max_count = 0, min_count = labelsets.empty() ? 0 : counts[0];
    for (std::size_t v = 0; v < system.size(); ++v) {
        dist.counts[system.value(v).name] = counts[v];
        max_count = std::max(max_count, counts[v]);
        min_count = std::min(min_count, counts[v]);
    }
    if (!labelsets.empty() && min_count > 0)
        dist.max_min_ratio = static_cast<double>(max_count) / static_cast<double>(min_count);
    return dist;
}

double consistency_variance(const std::vector<std::vector<double>>& samples) {
    if (samples.size() < 2)
        throw std::invalid_argument("consistency variance requires at least 2 samples");
    const std::size_t dims = samples.front().size();
    for (const auto& s : samples)
        if (s.size() != dims) throw std::invalid_argument("samples have unequal lengths");
    const double m = static_cast<double>(samples.size());
    double total = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
        double mean = 0.0;
        for (const auto& s : samples) mean += s[d];
        mean /= m;
        double var = 0.0;
        for (const auto& s : samples) var += (s[d] - mean) * (s[d] - mean);
        total += var / m;  // population variance
    }
    return dims == 0 ? 0.0 : total / static_cast<double>(dims);
}

TokenReport token_report(const std::vector<FinalResult>& results) {
    TokenReport report;
    if (results.empty()) return report;
    long llm_prompt = 0;
    for (const auto& r : results) {
        report.total_llm_tokens += r.llm_usage.total();
        llm_prompt += r.llm_usage.prompt_tokens;
        report.total_detector_tokens += r.detector_usage.total();
    }
    const double n = static_cast<double>(results.size());
    report.mean_llm_tokens = static_cast<double>(report.total_llm_tokens) / n;
    report.mean_llm_prompt_tokens = static_cast<double>(llm_prompt) / n;
    report.mean_detector_tokens = static_cast<double>(report.total_detector_tokens) / n;
    return report;
}

EvalReport evaluate(const std::vector<FinalResult>& results,
                    const std::vector<LabelVector>& golds, const ValueSystem& system) {
    std::vector<LabelVector> preds;
    preds.reserve(results.size());
    for (const auto& r : results) preds.push_back(r.labels);
    EvalReport report;
    report.accuracy = accuracy(preds, golds);
    MacroF1Result f1 = macro_f1(preds, golds, system);
    report.macro_f1 = f1.macro;
    report.per_value_f1 = std::move(f1.per_value);
    for (std::size_t v = 0; v < system.size(); ++v) {
        int support = 0;
        for (const auto& g : golds) support += g[v];
        report.support[system.value(v).name] = support;
    }
    if (!results.empty()) {
        long prompt = 0, completion = 0;
        for (const auto& r : results) {
            prompt += r.usage_total.prompt_tokens;
            completion += r.usage_total.completion_tokens;
        }
        report.mean_prompt_tokens = static_cast<double>(prompt) / results.size();
        report.mean_completion_tokens = static_cast<double>(completion) / results.size();
    }
    return report;
}

}  // namespace eavit
