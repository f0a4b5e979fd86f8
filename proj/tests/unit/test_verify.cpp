#include "reflab/verify/verify.hpp"

#include "helpers.hpp"
#include "reflab/support/errors.hpp"
#include "reflab/support/fsutil.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <unistd.h>
#include <random>
#include <string>

namespace fs = std::filesystem;
using namespace reflab;
using namespace reflab::verify;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("reflab-verify-" + std::to_string(::getpid()) + "-" +
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

void run_or_die(const std::string& command, const std::string& cwd) {
    CommandResult result = run_command(command, cwd, 60.0);
    REQUIRE(result.exit_code == 0);
}

// A tiny buildable project: Ops.add has a deliberate off-by-one so OpsTest.testAdd
// fails at the baseline while everything still compiles.
std::string make_fixture_repo(const fs::path& dir) {
    fs::create_directories(dir / "src");
    fs::create_directories(dir / "tests");
    write_file_atomic((dir / "src/Ops.java").string(), R"(public class Ops {

    public static long add(long a, long b) {
        return a + b + 1;
    }

    public static long mul(long a, long b) {
        return a * b;
    }
}
)");
    write_file_atomic((dir / "tests/Check.java").string(), R"(public class Check {

    public static void assertEquals(long expected, long actual) {
        if (expected != actual) {
            throw new AssertionError("expected:<" + expected + "> but was:<" + actual + ">");
        }
    }
}
)");
    write_file_atomic((dir / "tests/OpsTest.java").string(), R"(public class OpsTest {

    public static void testAdd() {
        Check.assertEquals(4, Ops.add(2, 2));
    }

    public static void testMul() {
        Check.assertEquals(6, Ops.mul(2, 3));
    }
}
)");
    run_or_die("git init -q && git add -A && git -c user.name=t -c user.email=t@t "
               "commit -qm fixture",
               dir.string());
    CommandResult head = run_command("git rev-parse HEAD", dir.string(), 30.0);
    REQUIRE(head.exit_code == 0);
    std::string sha = head.output;
    while (!sha.empty() && isspace(static_cast<unsigned char>(sha.back())))
        sha.pop_back();
    return sha;
}

RepoConfig fixture_config(const fs::path& repo) {
    RepoConfig config;
    config.repository = repo.string();
    config.build_cmd =
        std::string(REFLAB_JAVAMINI_BIN) + " check src/*.java tests/*.java";
    config.test_cmd =
        std::string(REFLAB_JAVAMINI_BIN) + " test src/*.java tests/*.java";
    config.adapter = "lines";
    config.timeout_seconds = 60.0;
    config.branch_prefix = "eval";
    return config;
}

const std::string kFixedOps = R"(public class Ops {

    public static long add(long a, long b) {
        return a + b;
    }

    public static long mul(long a, long b) {
        return a * b;
    }
}
)";

const std::string kSabotagedOps = R"(public class Ops {

    public static long add(long a, long b) {
        return a + b + 1;
    }

    public static long mul(long a, long b) {
        return a * b + 100;
    }
}
)";

} // namespace

TEST_CASE("run_command captures output, exit codes, and timeouts") {
    CommandResult echo = run_command("echo hello && echo oops 1>&2", ".", 10.0);
    CHECK(echo.exit_code == 0);
    CHECK(echo.output.find("hello") != std::string::npos);
    CHECK(echo.output.find("oops") != std::string::npos);

    CHECK(run_command("exit 3", ".", 10.0).exit_code == 3);
    CHECK(run_command("definitely-not-a-command-xyz", ".", 10.0).exit_code == 127);

    CommandResult slow = run_command("sleep 5", ".", 0.2);
    CHECK(slow.timed_out);
}

TEST_CASE("run_command honours the working directory") {
    TempDir dir;
    write_file_atomic((dir.path / "marker.txt").string(), "present\n");
    CommandResult result = run_command("cat marker.txt", dir.path.string(), 10.0);
    CHECK(result.exit_code == 0);
    CHECK(result.output == "present\n");
}

TEST_CASE("repo config files validate their fields") {
    TempDir dir;
    fs::path good = dir.path / "repos.json";
    write_file_atomic(good.string(), R"({
  "calcsuite": {
    "repository": "/srv/repos/calcsuite.git",
    "build_cmd": "make build",
    "test_cmd": "make test",
    "adapter": "junit-xml-dir",
    "report_dir": "build/reports",
    "timeout_seconds": 45,
    "branch_prefix": "refactor"
  },
  "ledger": {
    "repository": "/srv/repos/ledger.git",
    "build_cmd": "./compile.sh",
    "test_cmd": "./run-tests.sh"
  }
})");
    auto configs = load_repo_configs(good.string());
    REQUIRE(configs.size() == 2);
    CHECK(configs.at("calcsuite").adapter == "junit-xml-dir");
    CHECK(configs.at("calcsuite").report_dir == "build/reports");
    CHECK(configs.at("calcsuite").timeout_seconds == doctest::Approx(45.0));
    CHECK(configs.at("calcsuite").branch_prefix == "refactor");
    CHECK(configs.at("ledger").adapter == "lines");
    CHECK(configs.at("ledger").timeout_seconds == doctest::Approx(300.0));

    fs::path missing = dir.path / "missing.json";
    write_file_atomic(missing.string(), R"({"x": {"repository": "r", "build_cmd": "b"}})");
    std::string message = thrown_message<SchemaError>(
        [&] { load_repo_configs(missing.string()); });
    CHECK(message.find("test_cmd") != std::string::npos);

    fs::path bad_adapter = dir.path / "bad.json";
    write_file_atomic(bad_adapter.string(),
                      R"({"x": {"repository": "r", "build_cmd": "b", "test_cmd": "t",
                          "adapter": "teletype"}})");
    CHECK_THROWS_AS(load_repo_configs(bad_adapter.string()), ConfigurationError);
}

TEST_CASE("split_diagnostics keeps notes attached and drops summaries") {
    std::string output =
        "Buffer.java:4: error: cannot find symbol\n"
        "  symbol:   variable data\n"
        "  location: class Buffer\n"
        "Buffer.java:9: error: incompatible types: long cannot be converted to int\n"
        "2 errors\n";
    auto diagnostics = split_diagnostics(output);
    REQUIRE(diagnostics.size() == 2);
    CHECK(diagnostics[0].find("symbol:   variable data") != std::string::npos);
    CHECK(diagnostics[0].find("location: class Buffer") != std::string::npos);
    CHECK(diagnostics[1].find("incompatible types") != std::string::npos);
    CHECK(diagnostics[1].find("2 errors") == std::string::npos);
}

TEST_CASE("every diagnostic lands in exactly one bucket") {
    std::vector<std::string> diagnostics = {
        "A.java:1: error: cannot find symbol\n  symbol:   variable offset",
        "A.java:2: error: cannot find symbol\n  symbol:   method assertTrue(boolean)",
        "A.java:3: error: variable x is already defined in class A",
        "A.java:4: error: incompatible types: int cannot be converted to boolean",
        "A.java:5: error: non-static variable total cannot be referenced from a static context",
        "A.java:6: error: illegal parenthesized expression",
        "A.java:7: error: cannot assign a value to final variable limit",
        "A.java:8: error: helper() is not public in B; cannot be accessed from outside package",
        "A.java:9: error: illegal static declaration in inner class A.Inner",
        "A.java:10: error: method does not override or implement a method from a supertype",
        "A.java:11: error: diamond operator is not supported in -source 1.5",
        "A.java:12: error: method add in class Ops cannot be applied to given types;",
        "A.java:13: error: missing return statement",
        "A.java:14: error: modifier static not allowed here",
        "A.java:15: error: something nobody has seen before",
        "A.java:16: error: cannot find symbol\n  symbol:   class Vector",
    };
    auto buckets = bucket_compiler_errors(diagnostics);
    CHECK(buckets.at("cannot find symbol: variable") == 1);
    CHECK(buckets.at("cannot find symbol: method") == 1);
    CHECK(buckets.at("is already defined in class") == 1);
    CHECK(buckets.at("incompatible types") == 1);
    CHECK(buckets.at("cannot be referenced from a static context") == 1);
    CHECK(buckets.at("illegal parenthesized expression") == 1);
    CHECK(buckets.at("cannot assign a value to final variable") == 1);
    CHECK(buckets.at("cannot be accessed from outside package") == 1);
    CHECK(buckets.at("illegal static declaration in inner class") == 1);
    CHECK(buckets.at("method does not override or implement") == 1);
    CHECK(buckets.at("diamond operator not supported") == 1);
    CHECK(buckets.at("cannot be applied to given types") == 1);
    CHECK(buckets.at("missing return statement") == 1);
    CHECK(buckets.at("modifier static not allowed here") == 1);
    CHECK(buckets.at("other") == 2); // unseen text + unresolved class

    int total = 0;
    for (const auto& [name, count] : buckets) total += count;
    CHECK(total == static_cast<int>(diagnostics.size()));
    CHECK(bucket_names().size() == 14);
}

TEST_CASE("lines adapter parses TEST/SUMMARY output and rejects garbage") {
    std::string output =
        "some stray build output\n"
        "TEST OpsTest.testAdd FAIL expected:<4> but was:<5>\n"
        "TEST OpsTest.testMul PASS\n"
        "TEST OpsTest.testDiv ERROR ArithmeticException: / by zero\n"
        "SUMMARY total=3 passed=1 failed=1 errors=1\n";
    TestReport report = parse_lines_report(output);
    CHECK(report.executed == 3);
    CHECK(report.failed == std::set<std::string>{"OpsTest.testAdd"});
    CHECK(report.errored == std::set<std::string>{"OpsTest.testDiv"});

    CHECK_THROWS_AS(parse_lines_report("no summary here\n"), HarnessError);
}

TEST_CASE("junit xml adapter reads testcase outcomes") {
    std::string xml = R"(<?xml version="1.0" encoding="UTF-8"?>
<testsuite name="OpsTest" tests="3" failures="1" errors="1">
  <testcase classname="OpsTest" name="testAdd"/>
  <testcase classname="OpsTest" name="testMul">
    <failure message="expected:&lt;6&gt;">trace</failure>
  </testcase>
  <testcase classname="OpsTest" name="testDiv">
    <error message="boom">trace</error>
  </testcase>
</testsuite>
)";
    TestReport report = parse_junit_xml(xml);
    CHECK(report.executed == 3);
    CHECK(report.failed == std::set<std::string>{"OpsTest.testMul"});
    CHECK(report.errored == std::set<std::string>{"OpsTest.testDiv"});
}

TEST_CASE("diff_outcomes uses set semantics over unioned runs") {
    TestReport baseline;
    baseline.failed = {"T1"};
    baseline.executed = 3;
    TestReport sabotaged;
    sabotaged.failed = {"T1", "T2"};
    sabotaged.executed = 3;

    auto outcome = diff_outcomes({baseline, baseline}, {sabotaged, sabotaged});
    CHECK(outcome.compiled);
    CHECK(outcome.runs == 2);
    CHECK(outcome.new_failed == 1);
    CHECK(outcome.new_errored == 0);
    CHECK_FALSE(outcome.unstable);

    TestReport clean;
    clean.executed = 3;
    auto fixed = diff_outcomes({baseline}, {clean});
    CHECK(fixed.new_failed == 0);
    CHECK(fixed.new_errored == 0);

    TestReport errored;
    errored.errored = {"T2", "T3"};
    errored.executed = 3;
    CHECK(diff_outcomes({clean}, {errored}).new_errored == 2);

    CHECK_THROWS_AS(diff_outcomes({}, {clean}), StateError);
    CHECK_THROWS_AS(diff_outcomes({clean}, {}), StateError);
}

TEST_CASE("diff_outcomes of a report list against itself is always zero") {
    std::mt19937 rng(20240817);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<TestReport> reports;
        int runs = 1 + static_cast<int>(rng() % 4);
        for (int r = 0; r < runs; ++r) {
            TestReport report;
            report.executed = 10;
            for (int t = 0; t < 10; ++t) {
                unsigned roll = rng() % 4;
                std::string id = "T" + std::to_string(t);
                if (roll == 1) report.failed.insert(id);
                if (roll == 2) report.errored.insert(id);
            }
            reports.push_back(std::move(report));
        }
        auto outcome = diff_outcomes(reports, reports);
        CHECK(outcome.new_failed == 0);
        CHECK(outcome.new_errored == 0);
    }
}

TEST_CASE("cross-run disagreement sets unstable") {
    TestReport pass_run;
    pass_run.executed = 2;
    TestReport fail_run;
    fail_run.failed = {"T2"};
    fail_run.executed = 2;

    auto outcome = diff_outcomes({pass_run}, {pass_run, fail_run});
    CHECK(outcome.unstable);
    CHECK(outcome.new_failed == 1);

    auto steady = diff_outcomes({pass_run}, {fail_run, fail_run});
    CHECK_FALSE(steady.unstable);
}

TEST_CASE("workspace lifecycle: prepare, variant branches, compile, test, diff") {
    TempDir upstream;
    std::string baseline_sha = make_fixture_repo(upstream.path);
    RepoConfig config = fixture_config(upstream.path);

    TempDir clones;
    fs::path clone = clones.path / "ledger";
    Workspace workspace = Workspace::prepare(config, baseline_sha, clone.string());
    CHECK(workspace.baseline_revision() == baseline_sha);
    CHECK(fs::exists(clone / "src/Ops.java"));

    std::string baseline_tree = workspace.tree_hash(baseline_sha);

    // baseline behavior: compiles, testAdd fails
    auto baseline_reports = run_tests(workspace, baseline_sha, config, 2);
    REQUIRE(baseline_reports.size() == 2);
    CHECK(baseline_reports[0].executed == 2);
    CHECK(baseline_reports[0].failed == std::set<std::string>{"OpsTest.testAdd"});

    SUBCASE("identity patch compiles and changes nothing") {
        std::string branch = workspace.commit_variant(
            {{"src/Ops.java", read_file((clone / "src/Ops.java").string())}},
            "real_01", "zero_shot", 1);
        CHECK(branch == "eval/real_01/zero_shot/1");
        auto compiled = compile(workspace, branch, config);
        CHECK(compiled.success);
        auto outcome = diff_outcomes(baseline_reports,
                                     run_tests(workspace, branch, config, 2));
        CHECK(outcome.new_failed == 0);
        CHECK(outcome.new_errored == 0);
    }

    SUBCASE("sabotaged variant breaks one more test") {
        std::string branch = workspace.commit_variant({{"src/Ops.java", kSabotagedOps}},
                                                      "real_01", "step_by_step", 1);
        auto compiled = compile(workspace, branch, config);
        REQUIRE(compiled.success);
        auto variant_reports = run_tests(workspace, branch, config, 2);
        CHECK(variant_reports[0].failed ==
              std::set<std::string>{"OpsTest.testAdd", "OpsTest.testMul"});
        auto outcome = diff_outcomes(baseline_reports, variant_reports);
        CHECK(outcome.new_failed == 1);
        CHECK(outcome.new_errored == 0);
        CHECK_FALSE(outcome.unstable);
    }

    SUBCASE("fixed variant clears the baseline failure") {
        std::string branch = workspace.commit_variant({{"src/Ops.java", kFixedOps}},
                                                      "real_01", "rule_based", 2);
        REQUIRE(compile(workspace, branch, config).success);
        auto outcome = diff_outcomes(baseline_reports,
                                     run_tests(workspace, branch, config, 2));
        CHECK(outcome.new_failed == 0);
        CHECK(outcome.new_errored == 0);
    }

    SUBCASE("uncompilable variant yields symbol diagnostics and buckets") {
        std::string broken = R"(public class Ops {
    public static long add(long a, long b) {
        return a + b + bias;
    }
    public static long mul(long a, long b) {
        return a * b;
    }
}
)";
        std::string branch = workspace.commit_variant({{"src/Ops.java", broken}},
                                                      "real_01", "two_shot", 1);
        auto compiled = compile(workspace, branch, config);
        REQUIRE_FALSE(compiled.success);
        REQUIRE_FALSE(compiled.diagnostics.empty());
        auto buckets = bucket_compiler_errors(compiled.diagnostics);
        CHECK(buckets.count("cannot find symbol: variable") == 1);
        int total = 0;
        for (const auto& [name, count] : buckets) total += count;
        CHECK(total == static_cast<int>(compiled.diagnostics.size()));
    }

    SUBCASE("branch labels are idempotent and the baseline tree is immutable") {
        std::string first = workspace.commit_variant({{"src/Ops.java", kFixedOps}},
                                                     "real_01", "objective", 3);
        std::string second = workspace.commit_variant({{"src/Ops.java", kSabotagedOps}},
                                                      "real_01", "objective", 3);
        CHECK(first == second);
        // branch content reflects the latest commit_variant
        workspace.checkout(second);
        CHECK(read_file((clone / "src/Ops.java").string()) == kSabotagedOps);
        CHECK(workspace.tree_hash(baseline_sha) == baseline_tree);
    }

    SUBCASE("zero files and dirty workspaces are state errors") {
        CHECK_THROWS_AS(workspace.commit_variant({}, "real_01", "zero_shot", 1),
                        StateError);
        write_file_atomic((clone / "src/Ops.java").string(), "tampered");
        CHECK_THROWS_AS(workspace.commit_variant({{"src/Ops.java", kFixedOps}},
                                                 "real_01", "zero_shot", 1),
                        StateError);
        workspace.checkout(baseline_sha); // recover
        CHECK(workspace.tree_hash(baseline_sha) == baseline_tree);
    }
}

TEST_CASE("prepare rejects unknown revisions and uncompilable baselines") {
    TempDir upstream;
    std::string baseline_sha = make_fixture_repo(upstream.path);
    RepoConfig config = fixture_config(upstream.path);

    TempDir clones;
    CHECK_THROWS_AS(Workspace::prepare(config, "0000000000000000000000000000000000000000",
                                       (clones.path / "a").string()),
                    WorkspaceError);

    RepoConfig broken = config;
    broken.build_cmd = "sh -c 'echo Bad.java:1: error: synthetic failure; exit 1'";
    CHECK_THROWS_AS(
        Workspace::prepare(broken, baseline_sha, (clones.path / "b").string()),
        BaselineError);
    // cached per revision: the second attempt fails the same way without rebuilding
    CHECK_THROWS_AS(
        Workspace::prepare(broken, baseline_sha, (clones.path / "b").string()),
        BaselineError);

    RepoConfig toolless = config;
    toolless.build_cmd = "definitely-not-a-build-tool-xyz build";
    CHECK_THROWS_AS(
        Workspace::prepare(toolless, baseline_sha, (clones.path / "c").string()),
        EnvironmentError);
}

TEST_CASE("junit-xml-dir adapter merges report files from the configured directory") {
    TempDir upstream;
    fs::create_directories(upstream.path / "canned");
    write_file_atomic((upstream.path / "canned/report.xml").string(),
                      R"(<testsuite tests="2" failures="1">
  <testcase classname="Suite" name="tOne"/>
  <testcase classname="Suite" name="tTwo"><failure>bad</failure></testcase>
</testsuite>
)");
    write_file_atomic((upstream.path / "build.sh").string(), "exit 0\n");
    run_or_die("git init -q && git add -A && git -c user.name=t -c user.email=t@t "
               "commit -qm fixture",
               upstream.path.string());
    CommandResult head = run_command("git rev-parse HEAD", upstream.path.string(), 30.0);
    std::string sha = head.output.substr(0, 40);

    RepoConfig config;
    config.repository = upstream.path.string();
    config.build_cmd = "sh build.sh";
    config.test_cmd = "mkdir -p reports && cp canned/report.xml reports/report.xml";
    config.adapter = "junit-xml-dir";
    config.report_dir = "reports";
    config.timeout_seconds = 30.0;

    TempDir clones;
    Workspace workspace =
        Workspace::prepare(config, sha, (clones.path / "x").string());
    auto reports = run_tests(workspace, sha, config, 2);
    REQUIRE(reports.size() == 2);
    CHECK(reports[1].executed == 2);
    CHECK(reports[1].failed == std::set<std::string>{"Suite.tTwo"});

    // leftover reports do not poison later variant commits
    std::string branch = workspace.commit_variant({{"note.txt", "patched\n"}},
                                                  "s", "zero_shot", 1);
    CHECK(branch == "refactor-eval/s/zero_shot/1");
}
