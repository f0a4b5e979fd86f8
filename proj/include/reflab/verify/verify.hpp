#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

// Workspace management and compile/test validation: establish a compilable
// baseline, commit patched variants to branches, run the project's test suite
// repeatedly, and diff results against the baseline.
namespace reflab::verify {

// Per-repository build/test configuration. Commands run through the shell in
// the workspace root; `adapter` selects how test output becomes a TestReport.
struct RepoConfig {
    std::string repository;            // clone source (path or URL)
    std::string build_cmd;
    std::string test_cmd;
    std::string adapter = "lines";     // "lines" | "junit-xml-dir"
    std::string report_dir;            // junit-xml-dir: directory of XML reports
    double timeout_seconds = 300.0;
    std::string branch_prefix = "refactor-eval";
};

// JSON file: top-level map repo key -> config record.
std::map<std::string, RepoConfig> load_repo_configs(const std::string& path);

struct TestReport {
    std::set<std::string> failed;
    std::set<std::string> errored;
    int executed = 0;
};

struct CompileResult {
    bool success = false;
    std::vector<std::string> diagnostics; // verbatim, one entry per diagnostic
};

struct ValidationOutcome {
    bool compiled = false;
    std::map<std::string, int> compiler_error_buckets;
    int new_failed = 0;
    int new_errored = 0;
    bool unstable = false;
    int runs = 0;
};

struct CommandResult {
    int exit_code = -1;
    std::string output;         // stdout + stderr interleaved
    bool start_failed = false;  // the shell itself could not run
    bool timed_out = false;
};

CommandResult run_command(const std::string& command, const std::string& cwd,
                          double timeout_seconds);

class Workspace {
public:
    // Clones (or reuses) the repository, force-checks-out the baseline
    // revision, and verifies that the baseline compiles. The compile check is
    // cached per (clone, revision). Throws WorkspaceError on clone/checkout
    // problems and BaselineError when the baseline does not compile.
    static Workspace prepare(const RepoConfig& config, const std::string& revision,
                             const std::string& clone_path);

    const std::string& root() const { return clone_path_; }
    const std::string& baseline_revision() const { return baseline_revision_; }
    const std::string& branch_prefix() const { return branch_prefix_; }

    // Writes the patched files on a branch named
    // `<prefix>/<scenario>/<strategy>/<run>` cut from the baseline revision.
    // Re-running the same label resets the branch. Throws StateError for a
    // dirty workspace or an empty file set.
    std::string commit_variant(const std::map<std::string, std::string>& files,
                               const std::string& scenario, const std::string& strategy,
                               int run);

    void checkout(const std::string& ref);
    std::string tree_hash(const std::string& ref);

private:
    Workspace(std::string clone_path, std::string revision, std::string prefix)
        : clone_path_(std::move(clone_path)), baseline_revision_(std::move(revision)),
          branch_prefix_(std::move(prefix)) {}

    std::string git(const std::vector<std::string>& args);

    std::string clone_path_;
    std::string baseline_revision_;
    std::string branch_prefix_;
};

// Checks out the branch and runs the configured build command. Exit codes
// 126/127 (shell could not execute the tool) raise EnvironmentError; any
// other nonzero exit is a compile failure with diagnostics split out of the
// output.
CompileResult compile(Workspace& workspace, const std::string& branch,
                      const RepoConfig& config);

// Runs the configured test command `repetitions` times on the branch. A run
// whose output yields no parseable report raises HarnessError.
std::vector<TestReport> run_tests(Workspace& workspace, const std::string& branch,
                                  const RepoConfig& config, int repetitions);

// new_failed = |union(variant failed) \ union(baseline failed)|, analogously
// for errors; unstable = any test whose status differs across variant runs.
ValidationOutcome diff_outcomes(const std::vector<TestReport>& baseline_reports,
                                const std::vector<TestReport>& variant_reports);

// Maps each diagnostic to one Table-6 bucket or "other"; totals always equal
// the diagnostic count.
std::map<std::string, int> bucket_compiler_errors(
    const std::vector<std::string>& diagnostics);

// The recognized bucket names, without "other".
const std::vector<std::string>& bucket_names();

// Splits raw compiler output into javac-shaped diagnostics: a header line
// "path:line: error: message" plus its indented continuation lines. Summary
// counts ("2 errors") are dropped.
std::vector<std::string> split_diagnostics(const std::string& output);

// Parses one test run's output. "lines" consumes TEST/SUMMARY lines;
// "junit-xml-dir" reads XML reports from `report_dir` under the workspace.
TestReport parse_lines_report(const std::string& output);
TestReport parse_junit_xml(const std::string& xml);

} // namespace reflab::verify
