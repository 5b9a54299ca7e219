#include "doctest.h"
#include "eavit/value_core.hpp"
#include "test_helpers.hpp"

using namespace eavit;
using namespace eavit::test;

TEST_CASE("bundled Schwartz system loads with 20 values in appendix order") {
    const ValueSystem& system = schwartz();
    CHECK(system.size() == 20);
    CHECK(system.value(0).name == "Self-direction: thought");
    CHECK(system.value(19).name == "Universalism: objectivity");
    CHECK(system.value(3).name == "Hedonism");
    for (const auto& v : system.values()) CHECK(!v.definition.empty());
}

TEST_CASE("value system from minimal documents") {
    auto system = ValueSystem::from_json(R"({"A": ["d"]})", "mini");
    CHECK(system.size() == 1);
    CHECK(system.value(0).name == "A");
    CHECK(system.value(0).definition == "d");

    SUBCASE("multi-element definitions join with a space") {
        auto sys2 = ValueSystem::from_json(R"({"A": ["d", "e"]})", "mini");
        CHECK(sys2.value(0).definition == "d e");
    }
}

TEST_CASE("value system rejects bad documents") {
    CHECK_THROWS_WITH_AS(ValueSystem::from_json(R"({"A": ["d"], "A": ["e"]})", "dup"),
                         doctest::Contains("duplicate value name 'A'"), std::invalid_argument);
    CHECK_THROWS_AS(ValueSystem::from_json(R"({"A": [""]})", "empty"), std::invalid_argument);
    CHECK_THROWS_AS(ValueSystem::from_json(R"({"A": "d"})", "shape"), std::runtime_error);
    CHECK_THROWS_AS(ValueSystem::from_json("not json", "bad"), std::runtime_error);
    CHECK_THROWS_AS(ValueSystem::from_json(R"({})", "empty"), std::invalid_argument);
}

TEST_CASE("normalized name lookup matches full entries only") {
    const ValueSystem& system = schwartz();
    CHECK(system.index_of_normalized("hedonism.") == system.index_of("Hedonism"));
    CHECK(system.index_of_normalized("  SECURITY: SOCIETAL ") == system.index_of("Security: societal"));
    CHECK(!system.index_of_normalized("Power"));  // never a substring match
    CHECK(system.index_of_normalized("Power: dominance"));
}

TEST_CASE("render_plain_text substitutes verbatim") {
    CHECK(render_plain_text("in favor of", "free college", "it reduces inequality") ==
          "I am in favor of the opinion of free college, because it reduces inequality.");
    CHECK(render_plain_text("against", "X", "Y") == "I am against the opinion of X, because Y.");
    CHECK_THROWS_AS(render_plain_text("", "X", "Y"), std::invalid_argument);

    std::string out = render_plain_text("against", "banning gas cars", "EVs are not ready");
    CHECK(out.find("against") != std::string::npos);
    CHECK(out.find("banning gas cars") != std::string::npos);
    CHECK(out.find("EVs are not ready") != std::string::npos);
}

namespace {

std::string touche_args_fixture() {
    return "Argument ID\tConclusion\tStance\tPremise\n"
           "A01\tWe should ban X\tin favor of\tX is harmful\n"
           "A02\tWe should fund Y\tagainst\tY is wasteful\n"
           "A03\tWe should do Z\tin favor of\tZ helps everyone\n";
}

std::string touche_labels_header(const eavit::ValueSystem& system) {
    std::string header = "Argument ID";
    for (const auto& v : system.values()) header += "\t" + v.name;
    return header;
}

std::string touche_labels_fixture(const eavit::ValueSystem& system) {
    std::string out = touche_labels_header(system) + "\n";
    for (const char* id : {"A01", "A02", "A03"}) {
        out += id;
        for (std::size_t i = 0; i < system.size(); ++i) out += (i == 9 ? "\t1" : "\t0");
        out += "\n";
    }
    return out;
}

}  // namespace

TEST_CASE("import_touche joins argument and label tables") {
    const ValueSystem& system = schwartz();
    auto args = temp_file("touche_args.tsv");
    auto labels = temp_file("touche_labels.tsv");
    write_file(args, touche_args_fixture());
    write_file(labels, touche_labels_fixture(system));

    auto records = import_touche(args, labels, system);
    REQUIRE(records.size() == 3);
    CHECK(records[0].instance.id == "A01");
    CHECK(records[0].instance.text ==
          "I am in favor of the opinion of We should ban X, because X is harmful.");
    CHECK(records[0].labels.size() == system.size());
    CHECK(records[0].labels[9] == 1);  // Security: societal
    CHECK(records[0].labels[0] == 0);
    CHECK(records[0].instance.meta.at("Stance") == "in favor of");
}

TEST_CASE("import_touche reports one-sided rows instead of dropping silently") {
    const ValueSystem& system = schwartz();
    auto args = temp_file("touche_args2.tsv");
    auto labels = temp_file("touche_labels2.tsv");
    write_file(args, touche_args_fixture());
    std::string label_rows = touche_labels_header(system) + "\n";
    for (const char* id : {"A01", "A04"}) {
        label_rows += id;
        for (std::size_t i = 0; i < system.size(); ++i) label_rows += "\t0";
        label_rows += "\n";
    }
    write_file(labels, label_rows);

    ImportReport report;
    auto records = import_touche(args, labels, system, &report);
    CHECK(records.size() == 1);
    REQUIRE(report.arguments_only.size() == 2);
    CHECK(report.arguments_only[0] == "A02");
    REQUIRE(report.labels_only.size() == 1);
    CHECK(report.labels_only[0] == "A04");
}

TEST_CASE("import_touche schema and domain errors") {
    const ValueSystem& system = schwartz();
    auto args = temp_file("touche_args3.tsv");
    write_file(args, touche_args_fixture());

    SUBCASE("missing value column is named") {
        auto labels = temp_file("touche_labels3.tsv");
        std::string header = "Argument ID";
        for (const auto& v : system.values())
            if (v.name != "Hedonism") header += "\t" + v.name;
        write_file(labels, header + "\nA01\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\t0\n");
        CHECK_THROWS_WITH_AS(import_touche(args, labels, system),
                             doctest::Contains("Hedonism"), std::runtime_error);
    }
    SUBCASE("non-binary label cell cites row and column") {
        auto labels = temp_file("touche_labels4.tsv");
        std::string row = "A01";
        for (std::size_t i = 0; i < system.size(); ++i) row += (i == 0 ? "\t2" : "\t0");
        write_file(labels, touche_labels_header(system) + "\n" + row + "\n");
        CHECK_THROWS_WITH_AS(import_touche(args, labels, system),
                             doctest::Contains("Self-direction: thought"), std::runtime_error);
    }
    SUBCASE("duplicate argument id") {
        auto labels = temp_file("touche_labels5.tsv");
        write_file(labels, touche_labels_fixture(system));
        auto dup_args = temp_file("touche_args_dup.tsv");
        write_file(dup_args,
                   "Argument ID\tConclusion\tStance\tPremise\nA01\tc\ts\tp\nA01\tc\ts\tp\n");
        CHECK_THROWS_WITH_AS(import_touche(dup_args, labels, system),
                             doctest::Contains("duplicate Argument ID"), std::runtime_error);
    }
}

TEST_CASE("canonical dataset round-trips through its file format") {
    const ValueSystem& system = schwartz();
    std::vector<AnnotatedRecord> records;
    AnnotatedRecord rec{{"r1", "some argument text", {{"Stance", "against"}}},
                        LabelVector::zeros(system),
                        {{"Hedonism", "about pleasure"}},
                        "original"};
    rec.labels.set(3, true);
    rec.labels.set(10, true);
    records.push_back(rec);
    AnnotatedRecord rec2{{"r2", "another text", {}}, LabelVector::zeros(system), {}, "icl_generated"};
    records.push_back(rec2);

    auto path = temp_file("dataset.jsonl");
    write_dataset(path, records, system);
    auto loaded = read_dataset(path, system);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].instance.id == "r1");
    CHECK(loaded[0].instance.text == "some argument text");
    CHECK(loaded[0].labels == records[0].labels);
    CHECK(loaded[0].explanations.at("Hedonism") == "about pleasure");
    CHECK(loaded[0].instance.meta.at("Stance") == "against");
    CHECK(loaded[1].source == "icl_generated");
    CHECK(loaded[1].labels.positives().empty());
}

TEST_CASE("label vector basics") {
    const ValueSystem& system = schwartz();
    auto lv = LabelVector::zeros(system);
    CHECK(lv.size() == 20);
    lv.set(5, true);
    CHECK(lv.positives() == std::vector<std::size_t>{5});
    CHECK_THROWS_AS(LabelVector("s", {0, 2}), std::invalid_argument);
}
