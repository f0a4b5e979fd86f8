#include "reflab/runner/runner.hpp"

#include "helpers.hpp"
#include "reflab/corpus/corpus.hpp"
#include "reflab/judge/judge.hpp"
#include "reflab/support/errors.hpp"
#include "reflab/support/fsutil.hpp"
#include "reflab/verify/verify.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace reflab;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("reflab-runner-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

const std::string kComputeBefore = R"(int compute(int[] values) {
    int total = 0;
    for (int value : values) {
        total += value;
    }
    return total * 2;
})";

const std::string kComputeAfter = R"(int compute(int[] values) {
    return sum(values) * 2;
}

int sum(int[] values) {
    int total = 0;
    for (int value : values) {
        total += value;
    }
    return total;
})";

const std::string kMulBefore = R"(public static long mul(long a, long b) {
        return a * b;
    })";

// Cassette payloads, keyed by what the pipeline should conclude from them.
const std::string kGoodCompute = "Here is the refactoring:\n```java\n" + kComputeAfter +
                                 "\n```\nThe loop now lives in its own method.\n";
const std::string kLexicalCompute =
    "```java\nint compute(int[] values) {\n    String s = \"broken;\n    return 0;\n}\n```\n";
const std::string kParsingCompute =
    "```java\nint compute(int[] values) { return values[; }\n```\n";
const std::string kProseOnly =
    "The method is already minimal, so no inlining is possible here.\n";
const std::string kGoodTotal = "```java\nint total(int a, int b) { return a + b; }\n```\n";
const std::string kIdentityMul = "```java\n" + kMulBefore + "\n```\nNo change was needed.\n";
const std::string kSabotagedMul =
    "```java\npublic static long mul(long a, long b) {\n        return a * b + 100;\n    }\n```\n";
const std::string kUncompilableMul =
    "```java\npublic static long mul(long a, long b) {\n        return a * bias;\n    }\n```\n";
const std::string kLexicalMul =
    "```java\npublic static long mul(long a, long b) {\n        String s = \"oops;\n        return a * b;\n    }\n```\n";
const std::string kParsingMul =
    "```java\npublic static long mul(long a, long b) { return a * ; }\n```\n";

// Corpus: two benchmark scenarios and one repository-backed scenario whose
// project is created by make_calcsuite below.
void write_corpus(const fs::path& path, const std::string& commit) {
    json doc;
    doc["bench_01"] = {{"refactoring_type", "Extract Method"},
                       {"before_code", kComputeBefore},
                       {"ground_truth_after", kComputeAfter},
                       {"target_name", "compute"}};
    doc["bench_02"] = {{"refactoring_type", "Inline Method"},
                       {"before_code", "int total(int a, int b) { return add(a, b); }"},
                       {"ground_truth_after", "int total(int a, int b) { return a + b; }"},
                       {"target_name", "total"}};
    doc["real_01"] = {{"refactoring_type", "Extract Method"},
                      {"before_code", kMulBefore},
                      {"commit_before", commit},
                      {"path_before", "src/Ops.java"},
                      {"repository", "calcsuite"},
                      {"target_name", "mul"}};
    write_file_atomic(path, doc.dump(2));
}

void write_catalog(const fs::path& path) {
    json doc;
    doc["Extract Method"] = {
        {"mechanics", json::array({"Create a new method named after its intention.",
                                   "Move the extracted code into it."})},
        {"examples", json::array({{{"before", "int f() { return 1 + 2; }"},
                                   {"after", "int f() { return sum(); }"}},
                                  {{"before", "void g() { a(); b(); }"},
                                   {"after", "void g() { ab(); }"}}})},
        {"rule", "A method body fragment with a single intention becomes its own method."}};
    doc["Inline Method"] = {
        {"mechanics", json::array({"Replace each call with the method body.",
                                   "Remove the method."})}};
    write_file_atomic(path, doc.dump(2));
}

std::string run_git(const std::string& command, const std::string& cwd) {
    auto result = verify::run_command(command, cwd, 60.0);
    REQUIRE(result.exit_code == 0);
    return result.output;
}

// A green-baseline project: both tests pass before any patch.
std::string make_calcsuite(const fs::path& dir) {
    fs::create_directories(dir / "src");
    fs::create_directories(dir / "tests");
    write_file_atomic(dir / "src/Ops.java", R"(public class Ops {

    public static long add(long a, long b) {
        return a + b;
    }

    public static long mul(long a, long b) {
        return a * b;
    }
}
)");
    write_file_atomic(dir / "tests/Check.java", R"(public class Check {

    public static void assertEquals(long expected, long actual) {
        if (expected != actual) {
            throw new AssertionError("expected:<" + expected + "> but was:<" + actual + ">");
        }
    }
}
)");
    write_file_atomic(dir / "tests/OpsTest.java", R"(public class OpsTest {

    public static void testAdd() {
        Check.assertEquals(5, Ops.add(2, 3));
    }

    public static void testMul() {
        Check.assertEquals(20, Ops.mul(4, 5));
    }
}
)");
    run_git("git init -q && git add -A && git -c user.name=t -c user.email=t@t "
            "commit -qm fixture",
            dir.string());
    std::string sha = run_git("git rev-parse HEAD", dir.string());
    while (!sha.empty() && isspace(static_cast<unsigned char>(sha.back()))) sha.pop_back();
    return sha;
}

void write_repos_config(const fs::path& path, const fs::path& repo) {
    json doc;
    doc["calcsuite"] = {
        {"repository", repo.string()},
        {"build_cmd", std::string(REFLAB_JAVAMINI_BIN) + " check src/*.java tests/*.java"},
        {"test_cmd", std::string(REFLAB_JAVAMINI_BIN) + " test src/*.java tests/*.java"},
        {"adapter", "lines"},
        {"timeout_seconds", 60.0}};
    write_file_atomic(path, doc.dump(2));
}

// Records the replay cassette by rendering each prompt exactly as the batch
// will. Two lookups are left out on purpose so the batch reports misses.
void record_cassette(const fs::path& path, const fs::path& corpus_path,
                     const fs::path& catalog_path) {
    auto scenarios = corpus::load_scenarios(corpus_path);
    auto catalog = corpus::load_catalog(catalog_path);
    auto store = prompt::TemplateStore::load(REFLAB_TEMPLATE_DIR);
    auto cassette = gateway::Cassette::open(path, gateway::CassetteMode::record);

    auto store_reply = [&](const std::string& scenario_id, prompt::Strategy strategy, int run,
                           const std::string& reply) {
        for (const auto& scenario : scenarios) {
            if (scenario.id != scenario_id) continue;
            const auto* entry = &catalog.lookup(scenario.refactoring_type);
            auto rendered = prompt::render(strategy, scenario, entry, store);
            cassette.store(gateway::prompt_hash(rendered.text), run, reply);
            return;
        }
        FAIL("unknown scenario in fixture: ", scenario_id);
    };

    store_reply("bench_01", prompt::Strategy::zero_shot, 1, kGoodCompute);
    store_reply("bench_01", prompt::Strategy::zero_shot, 2, kLexicalCompute);
    store_reply("bench_01", prompt::Strategy::two_shot, 1, kParsingCompute);
    // bench_01 two_shot run 2 intentionally missing
    store_reply("bench_01", prompt::Strategy::rule_based, 1, kGoodCompute);
    store_reply("bench_01", prompt::Strategy::rule_based, 2, kGoodCompute);
    store_reply("bench_02", prompt::Strategy::zero_shot, 1, kProseOnly);
    store_reply("bench_02", prompt::Strategy::zero_shot, 2, kGoodTotal);
    store_reply("real_01", prompt::Strategy::zero_shot, 1, kIdentityMul);
    store_reply("real_01", prompt::Strategy::zero_shot, 2, kSabotagedMul);
    store_reply("real_01", prompt::Strategy::two_shot, 1, kUncompilableMul);
    // real_01 two_shot run 2 intentionally missing
    store_reply("real_01", prompt::Strategy::rule_based, 1, kLexicalMul);
    store_reply("real_01", prompt::Strategy::rule_based, 2, kParsingMul);
    cassette.save();
}

// One fully prepared batch environment: fixture repo, corpus, catalog,
// cassette, repos config, and a manifest pointing at all of them.
struct BatchFixture {
    TempDir dir;
    runner::RunManifest manifest;

    BatchFixture() {
        std::string commit = make_calcsuite(dir.path / "calcsuite");
        write_corpus(dir.path / "corpus.json", commit);
        write_catalog(dir.path / "catalog.json");
        write_repos_config(dir.path / "repos.json", dir.path / "calcsuite");
        record_cassette(dir.path / "cassette.json", dir.path / "corpus.json",
                        dir.path / "catalog.json");

        manifest.corpus_path = (dir.path / "corpus.json").string();
        manifest.catalog_path = (dir.path / "catalog.json").string();
        manifest.templates_dir = REFLAB_TEMPLATE_DIR;
        manifest.strategies = {prompt::Strategy::zero_shot, prompt::Strategy::two_shot,
                               prompt::Strategy::rule_based};
        manifest.model.model_name = "mock-model";
        manifest.model.api_base = "http://127.0.0.1:1/v1"; // unroutable on purpose
        manifest.runs_per_scenario = 2;
        manifest.cassette_mode = gateway::CassetteMode::replay;
        manifest.cassette_path = (dir.path / "cassette.json").string();
        manifest.out_dir = (dir.path / "runs").string();
        manifest.run_id = "batch-a";
        manifest.repos_config_path = (dir.path / "repos.json").string();
        manifest.workspace_root = (dir.path / "workspaces").string();
        manifest.test_repetitions = 2;
    }
};

const runner::ItemRecord& find_item(const std::vector<runner::ItemRecord>& records,
                                    const std::string& scenario, const std::string& strategy,
                                    int run) {
    for (const auto& record : records)
        if (record.scenario_id == scenario && record.strategy == strategy &&
            record.run_index == run)
            return record;
    FAIL("no record for ", scenario, "/", strategy, "/", run);
    static runner::ItemRecord unreachable;
    return unreachable;
}

} // namespace

TEST_CASE("manifest validation rejects out-of-range fields") {
    runner::RunManifest manifest;
    manifest.corpus_path = "c.json";
    manifest.catalog_path = "t.json";
    manifest.templates_dir = "templates";
    manifest.out_dir = "runs";
    manifest.strategies = {prompt::Strategy::zero_shot};
    manifest.model.model_name = "m";
    manifest.cassette_path = "cassette.json";
    CHECK_NOTHROW(runner::validate_manifest(manifest));

    auto broken = manifest;
    broken.runs_per_scenario = 0;
    CHECK_THROWS_AS(runner::validate_manifest(broken), ConfigurationError);

    broken = manifest;
    broken.strategies.clear();
    CHECK_THROWS_AS(runner::validate_manifest(broken), ConfigurationError);

    broken = manifest;
    broken.strategies = {prompt::Strategy::zero_shot, prompt::Strategy::zero_shot};
    CHECK_THROWS_AS(runner::validate_manifest(broken), ConfigurationError);

    broken = manifest;
    broken.model.model_name.clear();
    CHECK_THROWS_AS(runner::validate_manifest(broken), ConfigurationError);

    broken = manifest;
    broken.cassette_path.clear();
    CHECK_THROWS_AS(runner::validate_manifest(broken), ConfigurationError);
    broken.cassette_mode = gateway::CassetteMode::passthrough;
    CHECK_NOTHROW(runner::validate_manifest(broken));

    broken = manifest;
    broken.workers = 0;
    CHECK_THROWS_AS(runner::validate_manifest(broken), ConfigurationError);

    broken = manifest;
    broken.test_repetitions = -1;
    CHECK_THROWS_AS(runner::validate_manifest(broken), ConfigurationError);
}

TEST_CASE("a run manifest loads from its JSON form") {
    std::string config = R"({
        "corpus": "corpus.json",
        "catalog": "catalog.json",
        "templates": "templates",
        "strategies": ["zero_shot", "rule_based"],
        "model": {"model_name": "m1", "api_base": "http://h/v1",
                  "credential_env": "KEY_VAR", "sampling": {"temperature": 0.2}},
        "runs_per_scenario": 3,
        "cassette": {"mode": "record", "path": "c.json"},
        "repos_config": "repos.json",
        "workspace_root": "ws",
        "workers": 2,
        "test_repetitions": 4,
        "out_dir": "runs",
        "run_id": "r1"
    })";
    auto manifest = runner::manifest_from_json(config);
    CHECK(manifest.corpus_path == "corpus.json");
    REQUIRE(manifest.strategies.size() == 2);
    CHECK(manifest.strategies[0] == prompt::Strategy::zero_shot);
    CHECK(manifest.strategies[1] == prompt::Strategy::rule_based);
    CHECK(manifest.model.model_name == "m1");
    CHECK(manifest.model.credential_env == "KEY_VAR");
    CHECK(manifest.model.sampling.at("temperature") == 0.2);
    CHECK(manifest.runs_per_scenario == 3);
    CHECK(manifest.cassette_mode == gateway::CassetteMode::record);
    CHECK(manifest.cassette_path == "c.json");
    CHECK(manifest.workers == 2);
    CHECK(manifest.test_repetitions == 4);
    CHECK(manifest.run_id == "r1");
    CHECK_NOTHROW(runner::validate_manifest(manifest));

    CHECK_THROWS_AS(runner::manifest_from_json("[1]"), SchemaError);
    CHECK_THROWS_AS(runner::manifest_from_json(R"({"strategies": ["warp"]})"), SchemaError);
    CHECK_THROWS_AS(runner::manifest_from_json(R"({"cassette": {"mode": "vhs"}})"),
                    SchemaError);
}

TEST_CASE("item records survive a JSON round trip") {
    runner::ItemRecord record;
    record.scenario_id = "s1";
    record.refactoring_type = "Extract Method";
    record.dataset = "real";
    record.strategy = "rule_based";
    record.model = "m1";
    record.run_index = 3;
    record.status = "compile-failed";
    record.failure_kind = "compilation";
    record.prompt_hash = "abc123";
    record.latency_ms = 12.5;
    record.raw_text = "```java\nint f() {}\n```";
    record.before_code = "int f() { return 1; }";
    record.after_code = "int f() {}";
    record.warnings = {"fell back to first method"};
    record.methods = 1;
    record.loc = 1;
    record.cyclomatic = 1;
    record.fan_out = 0;
    record.codebleu = 0.75;
    record.compiled = false;
    record.compiler_error_buckets = {{"cannot find symbol: variable", 2}};

    auto round = runner::item_from_json(runner::item_to_json(record));
    CHECK(round.scenario_id == record.scenario_id);
    CHECK(round.strategy == record.strategy);
    CHECK(round.model == record.model);
    CHECK(round.run_index == 3);
    CHECK(round.status == "compile-failed");
    CHECK(round.terminal() == "compile-failed");
    CHECK(round.failure_kind == "compilation");
    CHECK(round.before_code == record.before_code);
    CHECK(round.after_code == record.after_code);
    CHECK(round.warnings == record.warnings);
    CHECK(round.loc == 1);
    CHECK(round.codebleu == 0.75);
    CHECK(round.compiled == false);
    CHECK(round.compiler_error_buckets.at("cannot find symbol: variable") == 2);
    CHECK_FALSE(round.new_failed.has_value());

    record.status = "patch-failed";
    record.stage = "lexical";
    CHECK(record.terminal() == "patch-failed(lexical)");

    CHECK_THROWS_AS(runner::item_from_json("not json"), SchemaError);
    CHECK_THROWS_AS(runner::item_from_json("{\"run_index\": 1}"), SchemaError);
}

TEST_CASE("a batch archives every tuple with its terminal status") {
    BatchFixture fixture;
    auto summary = runner::cmd_run(fixture.manifest);

    // 3 scenarios x 3 strategies x 2 runs
    CHECK(summary.items == 18);
    CHECK(summary.archive_dir == (fixture.dir.path / "runs" / "batch-a").string());
    CHECK(fs::is_regular_file(fs::path(summary.archive_dir) / "manifest.json"));
    CHECK(fs::is_regular_file(fs::path(summary.archive_dir) / "cassette.json"));

    auto records = runner::load_archive(summary.archive_dir);
    REQUIRE(records.size() == 18);

    SUBCASE("benchmark scenarios stop after extraction and metrics") {
        const auto& good = find_item(records, "bench_01", "zero_shot", 1);
        CHECK(good.status == "judged-only");
        CHECK(good.failure_kind == "none");
        CHECK(good.dataset == "benchmark");
        CHECK(good.model == "mock-model");
        CHECK(good.before_code == kComputeBefore);
        CHECK(good.after_code.find("int compute(int[] values)") == 0);
        CHECK(good.methods == 2);
        REQUIRE(good.loc.has_value());
        CHECK(*good.loc == 3);
        CHECK(good.cyclomatic == 1);
        CHECK(good.fan_out == 1);
        REQUIRE(good.codebleu.has_value());
        CHECK(*good.codebleu > 0.0);
        CHECK(*good.codebleu < 1.0);
        CHECK_FALSE(good.compiled.has_value());

        const auto& lexical = find_item(records, "bench_01", "zero_shot", 2);
        CHECK(lexical.status == "judged-only");
        CHECK(lexical.failure_kind == "lexical");
        CHECK(lexical.loc.has_value());
        CHECK_FALSE(lexical.cyclomatic.has_value());

        const auto& parsing = find_item(records, "bench_01", "two_shot", 1);
        CHECK(parsing.status == "judged-only");
        CHECK(parsing.failure_kind == "parsing");

        const auto& missing = find_item(records, "bench_02", "zero_shot", 1);
        CHECK(missing.status == "judged-only");
        CHECK(missing.failure_kind == "other");
        CHECK(missing.after_code.empty());
        CHECK(missing.error.find("no method fragment") != std::string::npos);
    }

    SUBCASE("cassette misses and unsupported strategies become skips") {
        const auto& miss = find_item(records, "bench_01", "two_shot", 2);
        CHECK(miss.status == "skipped");
        CHECK(miss.stage == "cassette-miss");
        CHECK(miss.terminal() == "skipped(cassette-miss)");

        for (const char* strategy : {"two_shot", "rule_based"}) {
            for (int run = 1; run <= 2; ++run) {
                const auto& unsupported = find_item(records, "bench_02", strategy, run);
                CHECK(unsupported.status == "skipped");
                CHECK(unsupported.stage == "unsupported-strategy");
                CHECK(unsupported.error.find("Inline Method") != std::string::npos);
            }
        }
    }

    SUBCASE("real scenarios run the full compile-and-test pipeline") {
        const auto& identity = find_item(records, "real_01", "zero_shot", 1);
        CHECK(identity.status == "validated");
        CHECK(identity.terminal() == "validated");
        CHECK(identity.compiled == true);
        CHECK(identity.new_failed == 0);
        CHECK(identity.new_errored == 0);
        CHECK(identity.unstable == false);
        CHECK(identity.test_runs == 2);

        const auto& sabotaged = find_item(records, "real_01", "zero_shot", 2);
        CHECK(sabotaged.status == "validated");
        CHECK(sabotaged.compiled == true);
        CHECK(sabotaged.new_failed == 1);
        CHECK(sabotaged.new_errored == 0);

        const auto& uncompilable = find_item(records, "real_01", "two_shot", 1);
        CHECK(uncompilable.status == "compile-failed");
        CHECK(uncompilable.failure_kind == "compilation");
        CHECK(uncompilable.compiled == false);
        CHECK(uncompilable.compiler_error_buckets.at("cannot find symbol: variable") == 1);
        CHECK_FALSE(uncompilable.new_failed.has_value());

        const auto& lexical = find_item(records, "real_01", "rule_based", 1);
        CHECK(lexical.terminal() == "patch-failed(lexical)");
        CHECK(lexical.failure_kind == "lexical");

        const auto& parsing = find_item(records, "real_01", "rule_based", 2);
        CHECK(parsing.terminal() == "patch-failed(parsing)");
        CHECK(parsing.failure_kind == "parsing");
    }

    SUBCASE("terminal status counts cover all tuples") {
        int total = 0;
        for (const auto& [status, count] : summary.status_counts) total += count;
        CHECK(total == 18);
        CHECK(summary.status_counts.at("judged-only") == 7);
        CHECK(summary.status_counts.at("skipped(unsupported-strategy)") == 4);
        CHECK(summary.status_counts.at("skipped(cassette-miss)") == 2);
        CHECK(summary.status_counts.at("validated") == 2);
        CHECK(summary.status_counts.at("compile-failed") == 1);
        CHECK(summary.status_counts.at("patch-failed(lexical)") == 1);
        CHECK(summary.status_counts.at("patch-failed(parsing)") == 1);
    }

    SUBCASE("rerunning into the same archive is refused") {
        CHECK_THROWS_AS(runner::cmd_run(fixture.manifest), StateError);
    }

    SUBCASE("report tables aggregate strategies, types, and failures") {
        runner::cmd_report(summary.archive_dir);
        fs::path report_dir = fs::path(summary.archive_dir) / "report";

        std::string by_strategy = read_file(report_dir / "by_strategy.csv");
        CHECK(by_strategy ==
              "strategy,n,compiled,new_failed,new_errored\n"
              "zero_shot,2,1.000±0.000,0.500±0.500,0.000±0.000\n"
              "two_shot,1,0.000±0.000,,\n");

        std::string by_run = read_file(report_dir / "errors_by_run.csv");
        CHECK(by_run ==
              "run,attempts,lexical,parsing,compilation,other\n"
              "1,7,1,1,1,1\n"
              "2,5,1,1,0,0\n");

        std::string by_type = read_file(report_dir / "by_type.csv");
        CHECK(by_type.find("refactoring_type,n,loc,cyclomatic,fan_out,codebleu,"
                           "compiled,new_failed,new_errored\n") == 0);
        CHECK(by_type.find("Extract Method,10,") != std::string::npos);
        CHECK(by_type.find("Inline Method,2,") != std::string::npos);

        std::string buckets = read_file(report_dir / "error_buckets.csv");
        CHECK(buckets.find("bucket,count\n") == 0);
        CHECK(buckets.find("cannot find symbol: variable,1\n") != std::string::npos);
        CHECK(buckets.find("other,0\n") != std::string::npos);
        // every named bucket plus "other"
        CHECK(std::count(buckets.begin(), buckets.end(), '\n') == 16);

        std::string markdown = read_file(report_dir / "report.md");
        CHECK(markdown.find("| zero_shot | 2 | 1.000±0.000 | 0.500±0.500 | 0.000±0.000 |") !=
              std::string::npos);
        CHECK(markdown.find("18 item(s): 12 attempted, 6 skipped.") != std::string::npos);

        SUBCASE("re-rendering the report is byte-identical") {
            std::map<std::string, std::string> first;
            for (const auto& entry : fs::directory_iterator(report_dir))
                first[entry.path().filename().string()] = read_file(entry.path());
            runner::cmd_report(summary.archive_dir);
            for (const auto& [name, content] : first)
                CHECK(read_file(report_dir / name) == content);
            CHECK(first.size() == 5);
        }
    }

    SUBCASE("judging an archive yields verdicts and agreement statistics") {
        // Record judge replies for every item that produced code.
        auto store = prompt::TemplateStore::load(REFLAB_TEMPLATE_DIR);
        fs::path judge_cassette_path = fixture.dir.path / "judge_cassette.json";
        {
            auto cassette =
                gateway::Cassette::open(judge_cassette_path, gateway::CassetteMode::record);
            for (const auto& record : records) {
                if (record.status == "skipped" || record.after_code.empty()) continue;
                std::string reply = "1";
                if (record.scenario_id == "bench_01" && record.strategy == "zero_shot" &&
                    record.run_index == 2)
                    reply = "0";
                if (record.scenario_id == "real_01" && record.strategy == "two_shot")
                    reply = "0";
                if (record.scenario_id == "real_01" && record.strategy == "rule_based" &&
                    record.run_index == 2)
                    reply = "no comment";
                std::string prompt_text = judge::render_judge_prompt(
                    store, record.before_code, record.after_code, record.refactoring_type);
                cassette.store(gateway::prompt_hash(prompt_text), record.run_index, reply);
            }
            cassette.save();
        }

        json labels = {{"bench_01/zero_shot/1", 1},
                       {"bench_01/zero_shot/2", 1},
                       {"real_01/zero_shot/1", 0},
                       {"real_01/two_shot/1", 0},
                       {"real_01/rule_based/2", 1}};
        fs::path labels_path = fixture.dir.path / "labels.json";
        write_file_atomic(labels_path, labels.dump(2));

        gateway::ModelConfig judge_config;
        judge_config.model_name = "judge-model";
        judge_config.api_base = "http://127.0.0.1:1/v1";

        auto judged = runner::cmd_judge(summary.archive_dir, judge_config, REFLAB_TEMPLATE_DIR,
                                        labels_path.string(), gateway::CassetteMode::replay,
                                        judge_cassette_path.string());
        CHECK(judged.judged == 11);
        CHECK(judged.successes == 8);
        CHECK(judged.unparseable == 1);
        REQUIRE(judged.table.has_value());
        CHECK(judged.table->a == 1);
        CHECK(judged.table->b == 1);
        CHECK(judged.table->c == 1);
        CHECK(judged.table->d == 1);

        std::string verdicts =
            read_file(fs::path(summary.archive_dir) / "report" / "verdicts.csv");
        CHECK(verdicts.find("scenario_id,strategy,run,verdict\n") == 0);
        CHECK(verdicts.find("bench_01,zero_shot,1,1\n") != std::string::npos);
        CHECK(verdicts.find("bench_01,zero_shot,2,0\n") != std::string::npos);
        CHECK(verdicts.find("real_01,rule_based,2,\n") != std::string::npos);
        CHECK(std::count(verdicts.begin(), verdicts.end(), '\n') == 12);

        std::string agreement =
            read_file(fs::path(summary.archive_dir) / "report" / "agreement.csv");
        CHECK(agreement ==
              "metric,value\n"
              "a,1\nb,1\nc,1\nd,1\nn,4\n"
              "p_o,0.5000\n"
              "kappa,0.0000\n"
              "p_pos,0.5000\n"
              "p_neg,0.5000\n"
              "pabak,0.0000\n");

        SUBCASE("judging with the generator model is a configuration error") {
            judge_config.model_name = "mock-model";
            CHECK_THROWS_AS(runner::cmd_judge(summary.archive_dir, judge_config,
                                              REFLAB_TEMPLATE_DIR, "",
                                              gateway::CassetteMode::replay,
                                              judge_cassette_path.string()),
                            ConfigurationError);
        }
    }
}

TEST_CASE("a concurrent batch reaches the same terminal statuses") {
    BatchFixture fixture;
    auto sequential = runner::cmd_run(fixture.manifest);

    fixture.manifest.run_id = "batch-b";
    fixture.manifest.workers = 4;
    auto concurrent = runner::cmd_run(fixture.manifest);

    CHECK(concurrent.items == sequential.items);
    CHECK(concurrent.status_counts == sequential.status_counts);

    auto a = runner::load_archive(sequential.archive_dir);
    auto b = runner::load_archive(concurrent.archive_dir);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].scenario_id == b[i].scenario_id);
        CHECK(a[i].strategy == b[i].strategy);
        CHECK(a[i].run_index == b[i].run_index);
        CHECK(a[i].terminal() == b[i].terminal());
        CHECK(a[i].after_code == b[i].after_code);
    }
}

TEST_CASE("an empty archive is an error, not an empty report") {
    TempDir dir;
    CHECK_THROWS_AS(runner::load_archive(dir.path.string()), StateError);
    CHECK_THROWS_AS(runner::cmd_report(dir.path.string()), StateError);
    fs::create_directories(dir.path / "items");
    CHECK_THROWS_AS(runner::cmd_report(dir.path.string()), StateError);
}

TEST_CASE("a real scenario without repository configuration is skipped honestly") {
    BatchFixture fixture;
    fixture.manifest.repos_config_path.clear();
    fixture.manifest.strategies = {prompt::Strategy::zero_shot};
    auto summary = runner::cmd_run(fixture.manifest);
    CHECK(summary.items == 6);

    auto records = runner::load_archive(summary.archive_dir);
    const auto& skipped = find_item(records, "real_01", "zero_shot", 1);
    CHECK(skipped.terminal() == "skipped(no-repo-config)");
    CHECK(skipped.error.find("calcsuite") != std::string::npos);
    // benchmark items are unaffected
    CHECK(find_item(records, "bench_01", "zero_shot", 1).status == "judged-only");
}
