#include "reflab/corpus/corpus.hpp"
#include "reflab/support/errors.hpp"
#include "reflab/support/fsutil.hpp"

#include <doctest.h>
#include <json.hpp>

#include "helpers.hpp"

#include <filesystem>
#include <unistd.h>

using namespace reflab;
using nlohmann::json;

namespace {

std::filesystem::path write_temp_json(const std::string& stem, const json& value) {
    auto path = std::filesystem::temp_directory_path() /
                ("reflab_test_" + stem + "_" + std::to_string(::getpid()) + ".json");
    reflab::write_file_atomic(path, value.dump(2));
    return path;
}

json benchmark_record(const std::string& type) {
    return {{"RefactMethod", type},
            {"BeforeCode", "int f() { return 1; }"},
            {"AfterCode", "int f() { return ONE; }"}};
}

json real_record(const std::string& type) {
    return {{"RefactMethod", type},
            {"BeforeCode", "int g() { return 2; }"},
            {"commitID_before", "0123456789abcdef"},
            {"path_before", "src/main/java/p/A.java"},
            {"name", "int g()"},
            {"Repository", "https://example.invalid/p/a"}};
}

} // namespace

TEST_CASE("scenario loading accepts listing-style field names") {
    json doc = {{"2", benchmark_record("Extract Method")},
                {"1", benchmark_record("Rename Method")},
                {"3", real_record("Inline Method")}};
    auto path = write_temp_json("scenarios_ok", doc);
    auto scenarios = corpus::load_scenarios(path);
    std::filesystem::remove(path);

    REQUIRE(scenarios.size() == 3);
    CHECK(scenarios[0].id == "1");
    CHECK(scenarios[1].id == "2");
    CHECK(scenarios[2].id == "3");
    CHECK(scenarios[0].refactoring_type == "Rename Method");
    CHECK(scenarios[0].dataset == corpus::Dataset::benchmark);
    REQUIRE(scenarios[0].ground_truth_after.has_value());

    const auto& real = scenarios[2];
    CHECK(real.dataset == corpus::Dataset::real);
    REQUIRE(real.commit_before.has_value());
    CHECK(*real.commit_before == "0123456789abcdef");
    REQUIRE(real.target_name.has_value());
    CHECK(real.target_kind == corpus::TargetKind::method);
}

TEST_CASE("scenario loading names the offending key on schema violations") {
    json doc = {{"1", {{"BeforeCode", "int f() {}"}, {"AfterCode", "int f() {}"}}}};
    auto path = write_temp_json("scenarios_missing_type", doc);
    auto message = thrown_message<reflab::SchemaError>([&] { corpus::load_scenarios(path); });
    CHECK(message.find("refactoring_type") != std::string::npos);
    std::filesystem::remove(path);

    json bench_no_after = {{"1", {{"RefactMethod", "Extract Method"},
                                  {"BeforeCode", "int f() {}"}}}};
    path = write_temp_json("scenarios_no_after", bench_no_after);
    CHECK_THROWS_AS(corpus::load_scenarios(path), reflab::SchemaError);
    std::filesystem::remove(path);

    json real_no_path = real_record("Inline Method");
    real_no_path.erase("path_before");
    json doc3 = {{"1", real_no_path}};
    path = write_temp_json("scenarios_no_path", doc3);
    message = thrown_message<reflab::SchemaError>([&] { corpus::load_scenarios(path); });
    CHECK(message.find("path_before") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("duplicate normalized catalog names are rejected") {
    json catalog = {{"Extract Method",
                     {{"mechanics", {"Create a new method.", "Move the code."}}}},
                    {"EXTRACT_METHOD", {{"mechanics", {"Duplicate entry."}}}}};
    auto path = write_temp_json("catalog_dup", catalog);
    CHECK_THROWS_AS(corpus::load_catalog(path), reflab::DuplicationError);
    std::filesystem::remove(path);
}

TEST_CASE("catalog lookup is case and separator insensitive") {
    json catalog = {
        {"Extract Method",
         {{"mechanics", {"Create a new method named after the intention.",
                         "Copy the extracted code into it."}},
          {"examples",
           {{{"before", "int f() { a(); b(); }"}, {"after", "int f() { g(); }"}},
            {{"before", "int h() { c(); d(); }"}, {"after", "int h() { k(); }"}}}},
          {"rule", "A method body fragment is moved into a new method."}}},
        {"Rename Method", {{"mechanics", {"Rename the method and its call sites."}}}}};
    auto path = write_temp_json("catalog_ok", catalog);
    auto loaded = corpus::load_catalog(path);
    std::filesystem::remove(path);

    CHECK(loaded.entries.size() == 2);
    CHECK(loaded.rule_supported_count == 1);
    CHECK_FALSE(loaded.warnings.empty()); // fewer than the full catalog
    CHECK(loaded.lookup("extract method").name == "Extract Method");
    CHECK(loaded.lookup("EXTRACT_METHOD").name == "Extract Method");
    CHECK(loaded.lookup("Extract  Method").name == "Extract Method");
    CHECK(loaded.has("rename method"));
    CHECK_FALSE(loaded.has("Inline Method"));
    auto unknown = thrown_message<reflab::UnknownTypeError>([&] { loaded.lookup("Inline Method"); });
    CHECK(unknown.find("Extract Method") != std::string::npos);

    const auto& entry = loaded.lookup("Extract Method");
    REQUIRE(entry.examples.size() == 2);
    CHECK(entry.examples[0].before_text == "int f() { a(); b(); }");
    REQUIRE(entry.rule_text.has_value());
}

TEST_CASE("scenarios validate against the catalog by normalized type") {
    json catalog = {{"Extract Method", {{"mechanics", {"Do it."}}}}};
    auto cpath = write_temp_json("catalog_val", catalog);
    auto loaded = corpus::load_catalog(cpath);
    std::filesystem::remove(cpath);

    json good = {{"1", benchmark_record("extract_method")}};
    auto spath = write_temp_json("scenarios_val_ok", good);
    auto scenarios = corpus::load_scenarios(spath);
    std::filesystem::remove(spath);
    CHECK_NOTHROW(corpus::validate_against_catalog(scenarios, loaded));

    json bad = {{"1", benchmark_record("Extract Widget")}};
    spath = write_temp_json("scenarios_val_bad", bad);
    auto bad_scenarios = corpus::load_scenarios(spath);
    std::filesystem::remove(spath);
    auto widget = thrown_message<reflab::UnknownTypeError>(
        [&] { corpus::validate_against_catalog(bad_scenarios, loaded); });
    CHECK(widget.find("Extract Widget") != std::string::npos);
}

TEST_CASE("scenario round-trip through to_json preserves every field") {
    json doc = {{"7", real_record("Move Method")}, {"8", benchmark_record("Extract Method")}};
    auto path = write_temp_json("scenarios_roundtrip", doc);
    auto scenarios = corpus::load_scenarios(path);
    std::filesystem::remove(path);

    auto path2 = write_temp_json("scenarios_roundtrip2", json::parse(corpus::to_json(scenarios)));
    auto reloaded = corpus::load_scenarios(path2);
    std::filesystem::remove(path2);

    REQUIRE(reloaded.size() == scenarios.size());
    for (size_t i = 0; i < scenarios.size(); ++i) {
        CHECK(reloaded[i].id == scenarios[i].id);
        CHECK(reloaded[i].refactoring_type == scenarios[i].refactoring_type);
        CHECK(reloaded[i].dataset == scenarios[i].dataset);
        CHECK(reloaded[i].before_code == scenarios[i].before_code);
        CHECK(reloaded[i].ground_truth_after == scenarios[i].ground_truth_after);
        CHECK(reloaded[i].commit_before == scenarios[i].commit_before);
        CHECK(reloaded[i].path_before == scenarios[i].path_before);
        CHECK(reloaded[i].target_name == scenarios[i].target_name);
        CHECK(reloaded[i].repository == scenarios[i].repository);
    }
}
