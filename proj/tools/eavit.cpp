// eavit: value-identification cascade runner and experiment toolkit.
//
// Subcommands: identify, baseline, datagen, eval, consistency, persona,
// token-report. Configuration comes from an optional JSON file plus flag
// overrides; all validation happens before any backend call.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "eavit/baselines.hpp"
#include "eavit/datagen.hpp"
#include "eavit/detector.hpp"
#include "eavit/gateway.hpp"
#include "eavit/metrics.hpp"
#include "eavit/persona.hpp"
#include "eavit/pipeline.hpp"
#include "eavit/prompt_kit.hpp"
#include "eavit/value_core.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using eavit::ChatBackend;
using ordered_json = nlohmann::ordered_json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackendSpec {
    std::string mode = "replay-strict";  // live | record | replay | replay-strict | mock
    std::string replay_file;
    std::string script_file;  // mock mode: JSON list of canned replies
    std::string base_url;
    std::string api_key_env = "EAVIT_API_KEY";
    int concurrency = 4;
};

struct AppConfig {
    std::string value_system;
    std::string templates_dir;
    BackendSpec detector;
    BackendSpec llm;
    eavit::PipelineConfig pipeline;
    int workers = 4;
    unsigned seed = 0;
};

void apply_json(BackendSpec& spec, const nlohmann::json& j) {
    if (j.contains("mode")) spec.mode = j.at("mode").get<std::string>();
    if (j.contains("replay_file")) spec.replay_file = j.at("replay_file").get<std::string>();
    if (j.contains("script_file")) spec.script_file = j.at("script_file").get<std::string>();
    if (j.contains("base_url")) spec.base_url = j.at("base_url").get<std::string>();
    if (j.contains("api_key_env")) spec.api_key_env = j.at("api_key_env").get<std::string>();
    if (j.contains("concurrency")) spec.concurrency = j.at("concurrency").get<int>();
}

AppConfig load_config(const std::string& path) {
    AppConfig config;
    config.value_system = (eavit::default_data_dir() / "schwartz_values.json").string();
    config.templates_dir = (eavit::default_data_dir() / "templates").string();
    if (path.empty()) return config;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(eavit::read_text_file(path));
    } catch (const std::exception& e) {
        throw ConfigError("cannot load config file '" + path + "': " + e.what());
    }
    if (doc.contains("value_system")) config.value_system = doc.at("value_system");
    if (doc.contains("templates")) config.templates_dir = doc.at("templates");
    if (doc.contains("detector")) apply_json(config.detector, doc.at("detector"));
    if (doc.contains("llm")) apply_json(config.llm, doc.at("llm"));
    if (doc.contains("sampling")) {
        const auto& s = doc.at("sampling");
        if (s.contains("samples")) config.pipeline.sampling.samples = s.at("samples");
        if (s.contains("temperature")) config.pipeline.sampling.temperature = s.at("temperature");
        if (s.contains("model")) config.pipeline.sampling.model = s.at("model");
        if (s.contains("max_output_tokens"))
            config.pipeline.sampling.max_output_tokens = s.at("max_output_tokens");
    }
    if (doc.contains("thresholds")) {
        const auto& t = doc.at("thresholds");
        if (t.contains("p_low")) config.pipeline.thresholds.p_low = t.at("p_low");
        if (t.contains("p_high")) config.pipeline.thresholds.p_high = t.at("p_high");
    }
    if (doc.contains("final")) {
        const auto& f = doc.at("final");
        if (f.contains("model")) config.pipeline.final_stage.model = f.at("model");
        if (f.contains("temperature")) config.pipeline.final_stage.temperature = f.at("temperature");
        if (f.contains("cot")) config.pipeline.final_stage.cot = f.at("cot");
        if (f.contains("max_output_tokens"))
            config.pipeline.final_stage.max_output_tokens = f.at("max_output_tokens");
    }
    if (doc.contains("workers")) config.workers = doc.at("workers");
    if (doc.contains("seed")) config.seed = doc.at("seed");
    return config;
}

void validate_backend(const BackendSpec& spec, const std::string& label,
                      std::vector<std::string>& errors) {
    const bool replayish =
        spec.mode == "replay" || spec.mode == "replay-strict" || spec.mode == "record";
    if (!replayish && spec.mode != "live" && spec.mode != "mock")
        errors.push_back(label + ": unknown backend mode '" + spec.mode + "'");
    if (replayish && spec.replay_file.empty())
        errors.push_back(label + ": mode '" + spec.mode + "' requires --" + label + "-replay");
    if ((spec.mode == "replay" || spec.mode == "replay-strict") &&
        !spec.replay_file.empty() && !fs::exists(spec.replay_file))
        errors.push_back(label + ": replay file '" + spec.replay_file + "' does not exist");
    if (spec.mode == "mock") {
        if (spec.script_file.empty())
            errors.push_back(label + ": mock mode requires --" + label + "-script");
        else if (!fs::exists(spec.script_file))
            errors.push_back(label + ": script file '" + spec.script_file + "' does not exist");
    }
    if ((spec.mode == "live" || spec.mode == "record") && spec.base_url.empty())
        errors.push_back(label + ": mode '" + spec.mode + "' requires --" + label + "-url");
}

void validate_common(const AppConfig& config, std::vector<std::string>& errors,
                     bool need_detector = true, bool need_llm = true) {
    if (!fs::exists(config.value_system))
        errors.push_back("value system file '" + config.value_system + "' does not exist");
    if (!fs::exists(config.templates_dir))
        errors.push_back("templates directory '" + config.templates_dir + "' does not exist");
    if (config.pipeline.sampling.samples < 1) errors.push_back("sampling requires L >= 1");
    const auto& t = config.pipeline.thresholds;
    if (!(0.0 < t.p_low && t.p_low < t.p_high && t.p_high < 1.0))
        errors.push_back("thresholds must satisfy 0 < p_low < p_high < 1");
    if (config.workers < 1) errors.push_back("workers must be >= 1");
    if (need_detector) validate_backend(config.detector, "detector", errors);
    if (need_llm) validate_backend(config.llm, "llm", errors);
}

[[noreturn]] void fail_config(const std::vector<std::string>& errors) {
    std::string joined = "configuration invalid:";
    for (const auto& e : errors) joined += "\n  - " + e;
    throw ConfigError(joined);
}

std::unique_ptr<ChatBackend> make_backend(const BackendSpec& spec) {
    if (spec.mode == "mock") {
        auto doc = nlohmann::json::parse(eavit::read_text_file(spec.script_file));
        std::vector<std::string> script;
        for (const auto& line : doc) script.push_back(line.get<std::string>());
        return std::make_unique<eavit::MockBackend>(std::move(script));
    }
    if (spec.mode == "replay" || spec.mode == "replay-strict") {
        auto store = std::make_shared<eavit::ReplayStore>(spec.replay_file);
        return std::make_unique<eavit::ReplayBackend>(store, spec.mode == "replay-strict");
    }
    eavit::HttpBackendConfig http;
    http.base_url = spec.base_url;
    http.concurrency = spec.concurrency;
    if (const char* key = std::getenv(spec.api_key_env.c_str())) http.api_key = key;
    auto live = std::make_shared<eavit::HttpBackend>(http);
    if (spec.mode == "record") {
        auto store = std::make_shared<eavit::ReplayStore>(spec.replay_file);
        return std::make_unique<eavit::ReplayBackend>(store, /*strict=*/false, live);
    }
    struct Owner : ChatBackend {
        std::shared_ptr<eavit::HttpBackend> inner;
        explicit Owner(std::shared_ptr<eavit::HttpBackend> b) : inner(std::move(b)) {}
        eavit::ChatExchange complete(const eavit::ChatRequest& r) override {
            return inner->complete(r);
        }
    };
    return std::make_unique<Owner>(live);
}

/// Index-sharded worker pool; exceptions are captured and rethrown on join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    const int count = std::min<int>(workers, static_cast<int>(n));
    if (count <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < count; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

ordered_json result_to_json(const std::string& id, const eavit::FinalResult& result,
                            const eavit::ValueSystem& system) {
    ordered_json rec;
    rec["id"] = id;
    ordered_json labels = ordered_json::array();
    for (auto i : result.labels.positives()) labels.push_back(system.value(i).name);
    rec["labels"] = std::move(labels);
    ordered_json prov = ordered_json::object();
    for (std::size_t i = 0; i < result.provenance.size(); ++i)
        prov[system.value(i).name] = eavit::provenance_name(result.provenance[i]);
    rec["provenance"] = std::move(prov);
    rec["candidate_count"] = result.candidate_count;
    rec["llm_prompt_tokens"] = result.llm_usage.prompt_tokens;
    rec["llm_completion_tokens"] = result.llm_usage.completion_tokens;
    rec["detector_prompt_tokens"] = result.detector_usage.prompt_tokens;
    rec["detector_completion_tokens"] = result.detector_usage.completion_tokens;
    rec["warnings"] = result.warnings;
    return rec;
}

void write_results(const fs::path& path, const std::vector<ordered_json>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open results file '" + path.string() + "'");
    for (const auto& row : rows) out << row.dump() << '\n';
}

ordered_json eval_to_json(const eavit::EvalReport& report) {
    ordered_json doc;
    doc["accuracy"] = report.accuracy;
    doc["macro_f1"] = report.macro_f1;
    doc["per_value_f1"] = report.per_value_f1;
    doc["support"] = report.support;
    doc["mean_prompt_tokens"] = report.mean_prompt_tokens;
    doc["mean_completion_tokens"] = report.mean_completion_tokens;
    return doc;
}

void write_json(const fs::path& path, const ordered_json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

void print_eval(const eavit::EvalReport& report) {
    std::cout << std::fixed << std::setprecision(4) << "accuracy      " << report.accuracy
              << "\nmacro_f1      " << report.macro_f1 << "\nmean tokens   "
              << std::setprecision(1) << report.mean_prompt_tokens << " prompt / "
              << report.mean_completion_tokens << " completion\n";
}

// ---------------------------------------------------------------------------

struct IdentifyArgs {
    std::string dataset;
    std::string out;
    std::string eval_out;
    bool baseline = false;
    eavit::StrategyConfig strategy;
};

int cmd_identify(const AppConfig& config, const IdentifyArgs& args) {
    std::vector<std::string> errors;
    validate_common(config, errors, /*need_detector=*/!args.baseline);
    if (!fs::exists(args.dataset))
        errors.push_back("dataset '" + args.dataset + "' does not exist");
    if (args.baseline &&
        (args.strategy.batch_size < 1 || args.strategy.batch_size > 1000))
        errors.push_back("batch size must be >= 1");
    if (!errors.empty()) fail_config(errors);

    auto system = eavit::ValueSystem::from_json_file(config.value_system);
    auto templates = eavit::TemplateLibrary::load(config.templates_dir);
    auto records = eavit::read_dataset(args.dataset, system);
    std::unique_ptr<ChatBackend> detector;
    if (!args.baseline) detector = make_backend(config.detector);
    auto llm = make_backend(config.llm);

    std::vector<eavit::FinalResult> results(records.size());
    parallel_for(records.size(), config.workers, [&](std::size_t i) {
        if (args.baseline) {
            results[i] = eavit::run_strategy(*llm, system, templates, records[i].instance.text,
                                             args.strategy);
        } else {
            eavit::PipelineConfig pipeline = config.pipeline;
            pipeline.sampling.sample_tag_prefix = records[i].instance.id + "#";
            results[i] = eavit::identify(*detector, *llm, system, templates,
                                         records[i].instance.text, pipeline);
        }
    });

    std::vector<ordered_json> rows;
    rows.reserve(results.size());
    for (std::size_t i = 0; i < results.size(); ++i)
        rows.push_back(result_to_json(records[i].instance.id, results[i], system));
    write_results(args.out, rows);

    auto token = eavit::token_report(results);
    std::cout << records.size() << " instances -> " << args.out << "\nmean online-LLM tokens "
              << std::fixed << std::setprecision(1) << token.mean_llm_tokens
              << " (prompt " << token.mean_llm_prompt_tokens << "), mean detector tokens "
              << token.mean_detector_tokens << "\n";

    if (!args.eval_out.empty()) {
        std::vector<eavit::LabelVector> golds;
        golds.reserve(records.size());
        for (const auto& r : records) golds.push_back(r.labels);
        auto report = eavit::evaluate(results, golds, system);
        write_json(args.eval_out, eval_to_json(report));
        print_eval(report);
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct DatagenArgs {
    std::string mode;  // explain | icl | targeted | emit
    std::string dataset;
    std::string out;
    std::string report_out;
    std::size_t count = 10;
    int budget = 100;
    std::vector<std::string> targets;
    int rarest = 0;
    bool reflection = false;
    double dedup_threshold = 0.7;
};

ordered_json gen_report_json(const eavit::GenReport& report) {
    ordered_json doc;
    doc["calls"] = report.calls;
    doc["kept"] = report.kept;
    doc["dropped_parse"] = report.dropped_parse;
    doc["dropped_roster"] = report.dropped_roster;
    doc["dropped_empty"] = report.dropped_empty;
    doc["counts_before"] = report.counts_before;
    doc["counts_after"] = report.counts_after;
    return doc;
}

int cmd_datagen(const AppConfig& config, const DatagenArgs& args) {
    std::vector<std::string> errors;
    validate_common(config, errors, /*need_detector=*/false,
                    /*need_llm=*/args.mode != "emit");
    if (args.mode != "explain" && args.mode != "icl" && args.mode != "targeted" &&
        args.mode != "emit")
        errors.push_back("unknown datagen mode '" + args.mode + "'");
    if (!fs::exists(args.dataset))
        errors.push_back("dataset '" + args.dataset + "' does not exist");
    if (args.mode == "targeted" && args.targets.empty() && args.rarest < 1)
        errors.push_back("targeted mode needs --target or --rarest");
    if (!errors.empty()) fail_config(errors);

    auto system = eavit::ValueSystem::from_json_file(config.value_system);
    auto templates = eavit::TemplateLibrary::load(config.templates_dir);
    auto records = eavit::read_dataset(args.dataset, system);

    if (args.mode == "emit") {
        auto training = eavit::emit_alpaca(records, system, templates, args.reflection);
        eavit::write_alpaca_json(args.out, training);
        std::cout << training.size() << " training records -> " << args.out << "\n";
        return 0;
    }

    auto llm = make_backend(config.llm);
    if (args.mode == "explain") {
        eavit::AugmentReport report;
        auto out = eavit::augment_explanations(*llm, system, templates, records, {}, &report);
        eavit::write_dataset(args.out, out, system);
        std::cout << report.calls << " calls, " << report.skipped_records << " skipped, "
                  << report.flagged_long << " over-length -> " << args.out << "\n";
        return 0;
    }

    eavit::GenConfig gen;
    gen.kind = args.mode == "icl" ? eavit::GenKind::icl : eavit::GenKind::targeted;
    gen.count = args.count;
    gen.call_budget = args.budget;
    gen.seed = config.seed;
    gen.model = config.pipeline.final_stage.model;
    if (gen.kind == eavit::GenKind::targeted) {
        gen.target_values = args.targets;
        if (gen.target_values.empty())
            gen.target_values = eavit::least_frequent_values(
                records, system, static_cast<std::size_t>(args.rarest));
    }
    eavit::GenReport report;
    auto generated = eavit::generate_batch(*llm, templates, system, records, gen, &report);

    std::vector<std::string> corpus;
    corpus.reserve(records.size());
    for (const auto& r : records) corpus.push_back(r.instance.text);
    auto dedup = eavit::dedup_filter(generated, corpus, args.dedup_threshold);

    // Output: originals plus the surviving generations.
    auto merged = records;
    merged.insert(merged.end(), dedup.kept.begin(), dedup.kept.end());
    eavit::write_dataset(args.out, merged, system);

    ordered_json doc = gen_report_json(report);
    doc["dedup_dropped"] = dedup.dropped.size();
    auto dist_before = eavit::class_distribution(
        [&] {
            std::vector<eavit::LabelVector> l;
            for (const auto& r : records) l.push_back(r.labels);
            return l;
        }(),
        system);
    auto dist_after = eavit::class_distribution(
        [&] {
            std::vector<eavit::LabelVector> l;
            for (const auto& r : merged) l.push_back(r.labels);
            return l;
        }(),
        system);
    if (dist_before.max_min_ratio) doc["max_min_ratio_before"] = *dist_before.max_min_ratio;
    if (dist_after.max_min_ratio) doc["max_min_ratio_after"] = *dist_after.max_min_ratio;
    if (!args.report_out.empty()) write_json(args.report_out, doc);
    std::cout << report.kept << " generated (" << dedup.kept.size() << " after dedup), "
              << report.calls << " calls -> " << args.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_eval(const AppConfig& config, const std::string& pred_path, const std::string& gold_path,
             const std::string& out) {
    std::vector<std::string> errors;
    if (!fs::exists(config.value_system))
        errors.push_back("value system file '" + config.value_system + "' does not exist");
    if (!fs::exists(pred_path)) errors.push_back("results file '" + pred_path + "' does not exist");
    if (!fs::exists(gold_path)) errors.push_back("dataset '" + gold_path + "' does not exist");
    if (!errors.empty()) fail_config(errors);

    auto system = eavit::ValueSystem::from_json_file(config.value_system);
    auto golds_records = eavit::read_dataset(gold_path, system);
    std::map<std::string, eavit::LabelVector> golds_by_id;
    for (const auto& r : golds_records) golds_by_id.emplace(r.instance.id, r.labels);

    std::ifstream in(pred_path, std::ios::binary);
    std::string line;
    std::vector<eavit::FinalResult> results;
    std::vector<eavit::LabelVector> golds;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = nlohmann::json::parse(line);
        const std::string id = row.at("id");
        auto it = golds_by_id.find(id);
        if (it == golds_by_id.end())
            throw std::runtime_error("result id '" + id + "' not present in the gold dataset");
        eavit::FinalResult res;
        res.labels = eavit::LabelVector::zeros(system);
        for (const auto& name : row.at("labels")) {
            auto idx = system.index_of(name.get<std::string>());
            if (!idx) throw std::runtime_error("unknown value '" + name.get<std::string>() +
                                               "' in results file");
            res.labels.set(*idx, true);
        }
        res.llm_usage = {row.value("llm_prompt_tokens", 0L), row.value("llm_completion_tokens", 0L)};
        res.detector_usage = {row.value("detector_prompt_tokens", 0L),
                              row.value("detector_completion_tokens", 0L)};
        res.usage_total = res.llm_usage;
        res.usage_total += res.detector_usage;
        results.push_back(std::move(res));
        golds.push_back(it->second);
    }
    auto report = eavit::evaluate(results, golds, system);
    if (!out.empty()) write_json(out, eval_to_json(report));
    print_eval(report);
    return 0;
}

int cmd_token_report(const AppConfig& config, const std::string& results_path) {
    std::vector<std::string> errors;
    if (!fs::exists(results_path))
        errors.push_back("results file '" + results_path + "' does not exist");
    if (!errors.empty()) fail_config(errors);
    (void)config;

    std::ifstream in(results_path, std::ios::binary);
    std::string line;
    std::vector<eavit::FinalResult> results;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = nlohmann::json::parse(line);
        eavit::FinalResult res;
        res.llm_usage = {row.value("llm_prompt_tokens", 0L), row.value("llm_completion_tokens", 0L)};
        res.detector_usage = {row.value("detector_prompt_tokens", 0L),
                              row.value("detector_completion_tokens", 0L)};
        results.push_back(std::move(res));
    }
    auto report = eavit::token_report(results);
    std::cout << std::fixed << std::setprecision(1) << "instances               "
              << results.size() << "\nmean online-LLM tokens  " << report.mean_llm_tokens
              << "\n  prompt-only           " << report.mean_llm_prompt_tokens
              << "\nmean detector tokens    " << report.mean_detector_tokens
              << "\ntotal online-LLM tokens " << report.total_llm_tokens
              << "\ntotal detector tokens   " << report.total_detector_tokens << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_consistency(const AppConfig& config, const std::string& dataset, int repeats,
                    const std::string& out) {
    std::vector<std::string> errors;
    validate_common(config, errors);
    if (!fs::exists(dataset)) errors.push_back("dataset '" + dataset + "' does not exist");
    if (repeats < 2) errors.push_back("repeats must be >= 2");
    if (!errors.empty()) fail_config(errors);

    auto system = eavit::ValueSystem::from_json_file(config.value_system);
    auto templates = eavit::TemplateLibrary::load(config.templates_dir);
    auto records = eavit::read_dataset(dataset, system);
    auto detector = make_backend(config.detector);
    auto llm = make_backend(config.llm);

    // Per instance and stage, `repeats` vectors; variance averaged over instances.
    std::vector<double> sums(4, 0.0);
    std::mutex sums_mutex;
    parallel_for(records.size(), config.workers, [&](std::size_t i) {
        std::vector<std::vector<double>> detector_1, detector_l, candidate_set, final_labels;
        for (int r = 0; r < repeats; ++r) {
            eavit::SamplingConfig sampling = config.pipeline.sampling;
            sampling.sample_tag_prefix =
                records[i].instance.id + "#r" + std::to_string(r) + "#";
            auto samples = eavit::sample_detector(*detector, system, templates,
                                                  records[i].instance.text, sampling);
            auto estimate = eavit::aggregate(samples);
            std::vector<double> first(system.size(), 0.0);
            for (std::size_t v = 0; v < system.size(); ++v)
                first[v] = samples.front().labels[v];
            detector_1.push_back(std::move(first));
            detector_l.push_back(estimate.probs);

            auto part = eavit::partition(estimate, config.pipeline.thresholds);
            std::vector<double> cand(system.size(), 0.0);
            for (auto v : part.candidates) cand[v] = 1.0;
            candidate_set.push_back(std::move(cand));

            auto result = eavit::finalize(*llm, system, templates, records[i].instance.text,
                                          part, config.pipeline.final_stage);
            std::vector<double> labels(system.size(), 0.0);
            for (std::size_t v = 0; v < system.size(); ++v) labels[v] = result.labels[v];
            final_labels.push_back(std::move(labels));
        }
        double v1 = eavit::consistency_variance(detector_1);
        double vl = eavit::consistency_variance(detector_l);
        double vc = eavit::consistency_variance(candidate_set);
        double vf = eavit::consistency_variance(final_labels);
        std::lock_guard lock(sums_mutex);
        sums[0] += v1;
        sums[1] += vl;
        sums[2] += vc;
        sums[3] += vf;
    });

    const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
    ordered_json doc;
    doc["repeats"] = repeats;
    doc["instances"] = records.size();
    doc["mean_variance"] = {{"detector_1", sums[0] / n},
                            {"detector_L", sums[1] / n},
                            {"candidate_set", sums[2] / n},
                            {"final", sums[3] / n}};
    if (!out.empty()) write_json(out, doc);
    std::cout << std::fixed << std::setprecision(6) << "detector_1     " << sums[0] / n
              << "\ndetector_L     " << sums[1] / n << "\ncandidate_set  " << sums[2] / n
              << "\nfinal          " << sums[3] / n << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct PersonaArgs {
    std::string answers;
    std::string texts;
    std::string out;
    bool generate = false;
    std::string generated_out;
    int min_texts = 3;
};

std::map<std::string, std::map<std::string, int>> read_answers(const fs::path& path) {
    std::map<std::string, std::map<std::string, int>> out;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = nlohmann::json::parse(line);
        std::map<std::string, int> answers;
        for (const auto& [q, a] : row.at("answers").items()) answers[q] = a.get<int>();
        out[row.at("individual").get<std::string>()] = std::move(answers);
    }
    return out;
}

int cmd_persona(const AppConfig& config, const PersonaArgs& args) {
    std::vector<std::string> errors;
    validate_common(config, errors);
    if (!fs::exists(args.answers))
        errors.push_back("answers file '" + args.answers + "' does not exist");
    if (!args.generate && !fs::exists(args.texts))
        errors.push_back("texts dataset '" + args.texts + "' does not exist");
    if (args.generate && args.generated_out.empty())
        errors.push_back("--generate requires --generated-out");
    if (!errors.empty()) fail_config(errors);

    auto system = eavit::ValueSystem::from_json_file(config.value_system);
    auto templates = eavit::TemplateLibrary::load(config.templates_dir);
    auto map = eavit::Level1Map::from_json_file(eavit::default_data_dir() / "level2_to_level1.json");
    auto questions = eavit::load_wvs_questions(eavit::default_data_dir() / "wvs_questions.json");
    auto individuals = read_answers(args.answers);

    if (args.generate) {
        // Recipe: role-play each individual's questionnaire profile over the
        // bundled topics, one short opinion text per topic.
        auto topics = eavit::load_persona_topics(eavit::default_data_dir() / "persona_topics.json");
        auto llm = make_backend(config.llm);
        std::vector<eavit::AnnotatedRecord> texts;
        for (const auto& [individual, answers] : individuals) {
            std::string profile;
            for (const auto& q : questions) {
                auto it = answers.find(q.id);
                if (it == answers.end())
                    throw std::runtime_error("individual '" + individual +
                                             "' lacks an answer for " + q.id);
                profile += q.text + " Your answer: " + std::to_string(it->second) +
                           " (1 = very much like you, 6 = not at all like you).\n";
            }
            for (std::size_t t = 0; t < topics.size(); ++t) {
                eavit::ChatRequest req;
                req.model = config.pipeline.final_stage.model;
                req.temperature = config.pipeline.sampling.temperature;
                req.max_output_tokens = 256;
                req.sample_tag = individual + "#topic" + std::to_string(t);
                req.messages = {{eavit::Role::user,
                                 "You are role-playing a survey respondent with this value "
                                 "profile:\n" +
                                     profile +
                                     "\nIn one short paragraph, state your opinion on the "
                                     "following topic, staying in character:\n" +
                                     topics[t]}};
                auto ex = llm->complete(req);
                eavit::AnnotatedRecord rec;
                rec.instance.id = individual + "-t" + std::to_string(t);
                rec.instance.text = ex.response_text;
                rec.instance.meta["individual"] = individual;
                rec.labels = eavit::LabelVector::zeros(system);
                texts.push_back(std::move(rec));
            }
        }
        eavit::write_dataset(args.generated_out, texts, system);
        std::cout << texts.size() << " persona texts -> " << args.generated_out << "\n";
        if (args.texts.empty()) return 0;
    }

    auto records = eavit::read_dataset(args.texts, system);
    auto detector = make_backend(config.detector);
    auto llm = make_backend(config.llm);

    std::vector<eavit::FinalResult> results(records.size());
    parallel_for(records.size(), config.workers, [&](std::size_t i) {
        eavit::PipelineConfig pipeline = config.pipeline;
        pipeline.sampling.sample_tag_prefix = records[i].instance.id + "#";
        results[i] = eavit::identify(*detector, *llm, system, templates,
                                     records[i].instance.text, pipeline);
    });

    std::map<std::string, std::vector<std::vector<std::uint8_t>>> per_individual;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto it = records[i].instance.meta.find("individual");
        if (it == records[i].instance.meta.end())
            throw std::runtime_error("text '" + records[i].instance.id +
                                     "' lacks an 'individual' meta key");
        per_individual[it->second].push_back(map.map_labels(results[i].labels, system));
    }

    ordered_json doc = ordered_json::object();
    double mean_sum = 0.0;
    int scored = 0;
    for (const auto& [individual, label_sets] : per_individual) {
        auto answers_it = individuals.find(individual);
        if (answers_it == individuals.end())
            throw std::runtime_error("no questionnaire answers for individual '" + individual +
                                     "'");
        auto s_pred = eavit::aggregate_individual(label_sets, args.min_texts);
        auto s_real = eavit::wvs_scores_for_answers(answers_it->second, questions, map);
        auto acc = eavit::persona_accuracy(s_pred, s_real);
        ordered_json entry;
        entry["texts"] = label_sets.size();
        ordered_json values = ordered_json::object();
        for (std::size_t v = 0; v < map.level1_names().size(); ++v) {
            values[map.level1_names()[v]] = {{"s_pred", static_cast<int>(s_pred[v])},
                                             {"s_real", s_real[v]},
                                             {"correct", static_cast<bool>(acc.correct[v])}};
        }
        entry["values"] = std::move(values);
        entry["accuracy"] = acc.mean;
        doc[individual] = std::move(entry);
        mean_sum += acc.mean;
        ++scored;
    }
    ordered_json report;
    report["individuals"] = doc;
    report["mean_accuracy"] = scored ? mean_sum / scored : 0.0;
    if (!args.out.empty()) write_json(args.out, report);
    std::cout << scored << " individuals, mean accuracy " << std::fixed << std::setprecision(4)
              << (scored ? mean_sum / scored : 0.0) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human-value identification cascade and experiment toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON configuration file")->expected(1);

    // Pre-scan for --config so file values become flag defaults.
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];

    AppConfig config;
    try {
        config = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--value-system", config.value_system, "value definitions JSON");
        cmd->add_option("--templates", config.templates_dir, "prompt templates directory");
        cmd->add_option("--workers", config.workers, "worker pool size");
        cmd->add_option("--seed", config.seed, "run seed");
        cmd->add_option("--samples", config.pipeline.sampling.samples, "detector samples L");
        cmd->add_option("--detector-temperature", config.pipeline.sampling.temperature,
                        "detector sampling temperature");
        cmd->add_option("--detector-model", config.pipeline.sampling.model, "detector model name");
        cmd->add_option("--p-low", config.pipeline.thresholds.p_low, "lower threshold");
        cmd->add_option("--p-high", config.pipeline.thresholds.p_high, "upper threshold");
        cmd->add_option("--llm-model", config.pipeline.final_stage.model, "online LLM model name");
        cmd->add_flag("--final-cot", config.pipeline.final_stage.cot,
                      "chain-of-thought final prompt");
        cmd->add_option("--detector-mode", config.detector.mode,
                        "detector backend: live|record|replay|replay-strict|mock");
        cmd->add_option("--detector-replay", config.detector.replay_file, "detector replay store");
        cmd->add_option("--detector-script", config.detector.script_file, "detector mock script");
        cmd->add_option("--detector-url", config.detector.base_url, "detector endpoint URL");
        cmd->add_option("--llm-mode", config.llm.mode,
                        "LLM backend: live|record|replay|replay-strict|mock");
        cmd->add_option("--llm-replay", config.llm.replay_file, "LLM replay store");
        cmd->add_option("--llm-script", config.llm.script_file, "LLM mock script");
        cmd->add_option("--llm-url", config.llm.base_url, "LLM endpoint URL");
    };

    IdentifyArgs identify_args;
    auto* identify = app.add_subcommand("identify", "run the detector->LLM cascade on a dataset");
    add_common(identify);
    identify->add_option("--dataset", identify_args.dataset, "input dataset JSONL")->required();
    identify->add_option("--out", identify_args.out, "results JSONL path")->required();
    identify->add_option("--eval-out", identify_args.eval_out,
                         "also score against the dataset's labels");

    IdentifyArgs baseline_args;
    baseline_args.baseline = true;
    auto* baseline = app.add_subcommand("baseline", "run a pure-LLM prompting strategy");
    add_common(baseline);
    baseline->add_option("--dataset", baseline_args.dataset, "input dataset JSONL")->required();
    baseline->add_option("--out", baseline_args.out, "results JSONL path")->required();
    baseline->add_option("--eval-out", baseline_args.eval_out,
                         "also score against the dataset's labels");
    baseline->add_option("--batch-size", baseline_args.strategy.batch_size,
                         "values per call (20 = single-step, 4 = 5-step, 1 = sequential)");
    baseline->add_flag("--cot", baseline_args.strategy.cot, "chain-of-thought prompting");
    unsigned shuffle_seed = 0;
    auto* shuffle_opt =
        baseline->add_option("--shuffle-seed", shuffle_seed, "shuffle value order (position bias)");

    DatagenArgs datagen_args;
    auto* datagen = app.add_subcommand("datagen", "training-data factory");
    add_common(datagen);
    datagen->add_option("--mode", datagen_args.mode, "explain|icl|targeted|emit")->required();
    datagen->add_option("--dataset", datagen_args.dataset, "input dataset JSONL")->required();
    datagen->add_option("--out", datagen_args.out, "output path")->required();
    datagen->add_option("--report-out", datagen_args.report_out, "generation report JSON");
    datagen->add_option("--count", datagen_args.count, "kept records to aim for");
    datagen->add_option("--budget", datagen_args.budget, "call budget");
    datagen->add_option("--target", datagen_args.targets, "targeted mode: value name (repeatable)");
    datagen->add_option("--rarest", datagen_args.rarest,
                        "targeted mode: auto-pick the k least frequent values");
    datagen->add_flag("--reflection", datagen_args.reflection,
                      "emit mode: include per-value reflection records");
    datagen->add_option("--dedup-threshold", datagen_args.dedup_threshold,
                        "ROUGE-L near-duplicate threshold");

    std::string eval_pred, eval_gold, eval_out;
    auto* eval = app.add_subcommand("eval", "score a results file against gold labels");
    eval->add_option("--value-system", config.value_system, "value definitions JSON");
    eval->add_option("--pred", eval_pred, "results JSONL")->required();
    eval->add_option("--gold", eval_gold, "gold dataset JSONL")->required();
    eval->add_option("--out", eval_out, "evaluation report JSON");

    std::string consistency_dataset, consistency_out;
    int repeats = 10;
    auto* consistency =
        app.add_subcommand("consistency", "per-stage output-variance study over repeated runs");
    add_common(consistency);
    consistency->add_option("--dataset", consistency_dataset, "input dataset JSONL")->required();
    consistency->add_option("--repeats", repeats, "independent runs per instance");
    consistency->add_option("--out", consistency_out, "report JSON");

    PersonaArgs persona_args;
    auto* persona = app.add_subcommand("persona", "virtual-individual questionnaire study");
    add_common(persona);
    persona->add_option("--answers", persona_args.answers, "questionnaire answers JSONL")
        ->required();
    persona->add_option("--texts", persona_args.texts, "persona texts dataset JSONL");
    persona->add_option("--out", persona_args.out, "study report JSON");
    persona->add_flag("--generate", persona_args.generate,
                      "generate persona texts from the answers first");
    persona->add_option("--generated-out", persona_args.generated_out,
                        "where to write generated persona texts");
    persona->add_option("--min-texts", persona_args.min_texts,
                        "texts required to mark a value relevant");

    std::string token_results;
    auto* token = app.add_subcommand("token-report", "token-cost summary of a results file");
    token->add_option("--results", token_results, "results JSONL")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (identify->parsed()) return cmd_identify(config, identify_args);
        if (baseline->parsed()) {
            if (shuffle_opt->count() > 0) baseline_args.strategy.shuffle_seed = shuffle_seed;
            baseline_args.strategy.model = config.pipeline.final_stage.model;
            return cmd_identify(config, baseline_args);
        }
        if (datagen->parsed()) return cmd_datagen(config, datagen_args);
        if (eval->parsed()) return cmd_eval(config, eval_pred, eval_gold, eval_out);
        if (consistency->parsed())
            return cmd_consistency(config, consistency_dataset, repeats, consistency_out);
        if (persona->parsed()) return cmd_persona(config, persona_args);
        if (token->parsed()) return cmd_token_report(config, token_results);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
