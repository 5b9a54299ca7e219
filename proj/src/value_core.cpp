#include "eavit/value_core.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace eavit {

using ordered_json = nlohmann::ordered_json;

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string normalize_value_name(std::string_view name) {
    std::size_t begin = 0, end = name.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(name[begin]))) ++begin;
    while (end > begin && (std::isspace(static_cast<unsigned char>(name[end - 1])) ||
                           std::ispunct(static_cast<unsigned char>(name[end - 1]))))
        --end;
    std::string out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i)
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(name[i]))));
    return out;
}

ValueSystem::ValueSystem(std::string name, std::vector<ValueDef> values)
    : name_(std::move(name)), values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("value system must contain at least one value");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const auto& v = values_[i];
        if (v.name.empty()) throw std::invalid_argument("value name must be nonempty");
        if (v.definition.empty())
            throw std::invalid_argument("empty definition for value '" + v.name + "'");
        if (!by_name_.emplace(v.name, i).second)
            throw std::invalid_argument("duplicate value name '" + v.name + "'");
        by_norm_.emplace(normalize_value_name(v.name), i);
    }
}

namespace {

// The DOM parser silently merges duplicate object keys, so the document is
// walked event-by-event to keep every top-level key.
struct ValueSystemSax : nlohmann::json_sax<nlohmann::json> {
    std::vector<ValueDef> values;
    int depth = 0;
    std::string current_key;
    bool in_definition_list = false;
    std::string error;

    bool key(string_t& val) override {
        if (depth == 1) current_key = val;
        return true;
    }
    bool start_object(std::size_t) override {
        ++depth;
        if (depth > 1) error = "value-system document must map names to definition lists";
        return error.empty();
    }
    bool end_object() override {
        --depth;
        return true;
    }
    bool start_array(std::size_t) override {
        if (depth != 1) {
            error = "definition of '" + current_key + "' must be a flat list of strings";
            return false;
        }
        in_definition_list = true;
        values.push_back({current_key, ""});
        return true;
    }
    bool end_array() override {
        in_definition_list = false;
        return true;
    }
    bool string(string_t& val) override {
        if (!in_definition_list) {
            error = "definition of '" + current_key + "' must be a list of strings";
            return false;
        }
        auto& def = values.back().definition;
        if (!def.empty()) def += ' ';  // joining rule for multi-element lists
        def += val;
        return true;
    }
    bool null() override { return fail(); }
    bool boolean(bool) override { return fail(); }
    bool number_integer(number_integer_t) override { return fail(); }
    bool number_unsigned(number_unsigned_t) override { return fail(); }
    bool number_float(number_float_t, const string_t&) override { return fail(); }
    bool binary(binary_t&) override { return fail(); }
    bool parse_error(std::size_t pos, const std::string&,
                     const nlohmann::json::exception& ex) override {
        error = "malformed value-system document at byte " + std::to_string(pos) + ": " + ex.what();
        return false;
    }

private:
    bool fail() {
        error = "unexpected value type under '" + current_key + "'";
        return false;
    }
};

}  // namespace

ValueSystem ValueSystem::from_json(const std::string& json_text, std::string name) {
    ValueSystemSax handler;
    nlohmann::json::sax_parse(json_text, &handler);
    if (!handler.error.empty()) throw std::runtime_error(handler.error);
    return ValueSystem(std::move(name), std::move(handler.values));
}

ValueSystem ValueSystem::from_json_file(const std::filesystem::path& path) {
    return from_json(read_text_file(path), path.stem().string());
}

std::optional<std::size_t> ValueSystem::index_of(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> ValueSystem::index_of_normalized(std::string_view name) const {
    auto it = by_norm_.find(normalize_value_name(name));
    if (it == by_norm_.end()) return std::nullopt;
    return it->second;
}

LabelVector::LabelVector(std::string system_name, std::vector<std::uint8_t> labels)
    : system_name_(std::move(system_name)), labels_(std::move(labels)) {
    for (auto v : labels_)
        if (v > 1) throw std::invalid_argument("label entries must be 0 or 1");
}

LabelVector LabelVector::zeros(const ValueSystem& system) {
    return LabelVector(system.name(), std::vector<std::uint8_t>(system.size(), 0));
}

std::vector<std::size_t> LabelVector::positives() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i]) out.push_back(i);
    return out;
}

std::string render_plain_text(const std::string& stance, const std::string& conclusion,
                              const std::string& premise) {
    if (stance.empty() || conclusion.empty() || premise.empty())
        throw std::invalid_argument("render_plain_text: stance, conclusion and premise must be nonempty");
    return "I am " + stance + " the opinion of " + conclusion + ", because " + premise + ".";
}

namespace {

std::vector<std::string> split_tsv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == '\t') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

struct TsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

TsvTable read_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    TsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty table: " + path.string());
    table.header = split_tsv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        table.rows.push_back(split_tsv_line(line));
    }
    return table;
}

std::size_t column_index(const TsvTable& table, const std::string& name,
                         const std::filesystem::path& path) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end())
        throw std::runtime_error("missing column '" + name + "' in " + path.string());
    return static_cast<std::size_t>(it - table.header.begin());
}

}  // namespace

std::vector<AnnotatedRecord> import_touche(const std::filesystem::path& arguments_tsv,
                                           const std::filesystem::path& labels_tsv,
                                           const ValueSystem& system, ImportReport* report) {
    TsvTable args = read_tsv(arguments_tsv);
    TsvTable labels = read_tsv(labels_tsv);

    std::size_t aid = column_index(args, "Argument ID", arguments_tsv);
    std::size_t conc = column_index(args, "Conclusion", arguments_tsv);
    std::size_t stance = column_index(args, "Stance", arguments_tsv);
    std::size_t prem = column_index(args, "Premise", arguments_tsv);

    std::size_t lid = column_index(labels, "Argument ID", labels_tsv);
    std::vector<std::size_t> value_cols;
    value_cols.reserve(system.size());
    for (const auto& v : system.values())
        value_cols.push_back(column_index(labels, v.name, labels_tsv));

    std::map<std::string, const std::vector<std::string>*> label_rows;
    for (const auto& row : labels.rows) {
        if (!label_rows.emplace(row.at(lid), &row).second)
            throw std::runtime_error("duplicate Argument ID '" + row.at(lid) + "' in labels table");
    }

    std::vector<AnnotatedRecord> out;
    std::map<std::string, bool> seen_args;
    for (std::size_t r = 0; r < args.rows.size(); ++r) {
        const auto& row = args.rows[r];
        const std::string& id = row.at(aid);
        if (!seen_args.emplace(id, true).second)
            throw std::runtime_error("duplicate Argument ID '" + id + "' in arguments table");
        auto it = label_rows.find(id);
        if (it == label_rows.end()) {
            if (report) report->arguments_only.push_back(id);
            continue;
        }
        std::vector<std::uint8_t> bits(system.size(), 0);
        for (std::size_t i = 0; i < system.size(); ++i) {
            const std::string& cell = it->second->at(value_cols[i]);
            if (cell == "0") {
                bits[i] = 0;
            } else if (cell == "1") {
                bits[i] = 1;
            } else {
                throw std::runtime_error("non-binary label cell '" + cell + "' at row " +
                                         std::to_string(r + 2) + ", column '" +
                                         system.value(i).name + "'");
            }
        }
        TextInstance inst;
        inst.id = id;
        inst.text = render_plain_text(row.at(stance), row.at(conc), row.at(prem));
        inst.meta = {{"Stance", row.at(stance)},
                     {"Conclusion", row.at(conc)},
                     {"Premise", row.at(prem)}};
        out.push_back({std::move(inst), LabelVector(system.name(), std::move(bits)), {}, "original"});
        label_rows.erase(it);
    }
    if (report)
        for (const auto& [id, _] : label_rows) report->labels_only.push_back(id);
    return out;
}

std::vector<AnnotatedRecord> read_dataset(const std::filesystem::path& path,
                                          const ValueSystem& system) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::vector<AnnotatedRecord> out;
    std::map<std::string, bool> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ordered_json doc;
        try {
            doc = ordered_json::parse(line);
        } catch (const ordered_json::parse_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": bad record: " + e.what());
        }
        AnnotatedRecord rec{{}, LabelVector::zeros(system), {}, "original"};
        rec.instance.id = doc.at("id").get<std::string>();
        rec.instance.text = doc.at("text").get<std::string>();
        if (rec.instance.text.empty())
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": empty text");
        if (!seen.emplace(rec.instance.id, true).second)
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": duplicate id '" + rec.instance.id + "'");
        for (const auto& name : doc.at("labels")) {
            auto idx = system.index_of(name.get<std::string>());
            if (!idx)
                throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                         ": unknown value '" + name.get<std::string>() + "'");
            rec.labels.set(*idx, true);
        }
        if (doc.contains("explanations"))
            for (const auto& [k, v] : doc.at("explanations").items())
                rec.explanations[k] = v.get<std::string>();
        if (doc.contains("meta"))
            for (const auto& [k, v] : doc.at("meta").items())
                rec.instance.meta[k] = v.get<std::string>();
        if (doc.contains("source")) rec.source = doc.at("source").get<std::string>();
        out.push_back(std::move(rec));
    }
    return out;
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<AnnotatedRecord>& records, const ValueSystem& system) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path.string());
    for (const auto& rec : records) {
        ordered_json doc;
        doc["id"] = rec.instance.id;
        doc["text"] = rec.instance.text;
        auto labels = ordered_json::array();
        for (auto i : rec.labels.positives()) labels.push_back(system.value(i).name);
        doc["labels"] = std::move(labels);
        doc["explanations"] = rec.explanations;
        if (!rec.instance.meta.empty()) doc["meta"] = rec.instance.meta;
        doc["source"] = rec.source;
        out << doc.dump() << '\n';
    }
}

}  // namespace eavit
