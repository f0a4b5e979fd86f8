#pragma once

#include "reflab/gateway/gateway.hpp"
#include "reflab/prompt/prompt.hpp"
#include "reflab/stats/agreement.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

// Batch orchestration: runs every (scenario, strategy, run) tuple through the
// prompt -> completion -> extraction -> metrics pipeline, patches and
// validates real-project scenarios, and archives one record per tuple.
namespace reflab::runner {

struct RunManifest {
    std::string corpus_path;
    std::string catalog_path;
    std::string templates_dir;
    std::vector<prompt::Strategy> strategies; // empty is a configuration error
    gateway::ModelConfig model;
    int runs_per_scenario = 5;
    gateway::CassetteMode cassette_mode = gateway::CassetteMode::replay;
    std::string cassette_path;     // required unless mode is passthrough
    std::string out_dir;           // archives land in <out_dir>/<run_id>
    std::string run_id;            // empty = derived from current UTC time
    std::string repos_config_path; // build/test commands per repository key
    std::string workspace_root;    // clone parent for real-project scenarios
    int workers = 1;
    int test_repetitions = 5;      // variant test-suite executions
};

// Throws ConfigurationError on out-of-range fields and SchemaError from the
// underlying loaders.
void validate_manifest(const RunManifest& manifest);

// JSON form mirroring the archived manifest snapshot: corpus, catalog,
// templates, strategies, model {model_name, provider_id, api_base,
// credential_env, sampling}, runs_per_scenario, cassette {mode, path},
// repos_config, workspace_root, workers, test_repetitions, out_dir, run_id.
// Credentials never appear here; only the environment variable name does.
RunManifest manifest_from_json(const std::string& json_text);

// One archived (scenario, strategy, run) tuple. `status` is terminal:
// judged-only | applied | patch-failed | compile-failed | validated | skipped.
struct ItemRecord {
    std::string scenario_id;
    std::string refactoring_type;
    std::string dataset; // "benchmark" | "real"
    std::string strategy;
    std::string model;
    int run_index = 1;

    std::string status;
    std::string stage;        // patch failure stage or skip reason
    std::string failure_kind; // none | lexical | parsing | compilation | other
    std::string error;        // harness-level detail, empty when clean

    std::string prompt_hash;
    double latency_ms = 0.0;
    std::string raw_text;
    std::string before_code; // scenario input, kept so judging needs no corpus
    std::string after_code;  // primary extracted fragment, empty when absent
    std::vector<std::string> warnings;
    int methods = 0;
    int classes = 0;
    int others = 0;

    std::optional<int> loc;
    std::optional<int> cyclomatic;
    std::optional<int> fan_out;
    std::optional<double> codebleu;

    std::optional<bool> compiled;
    std::map<std::string, int> compiler_error_buckets;
    std::optional<int> new_failed;
    std::optional<int> new_errored;
    std::optional<bool> unstable;
    int test_runs = 0;

    // "patch-failed(parsing)", "skipped(unsupported-strategy)", else status.
    std::string terminal() const;
};

std::string item_to_json(const ItemRecord& record);
ItemRecord item_from_json(const std::string& json_text);

struct RunSummary {
    std::string archive_dir;
    int items = 0;
    std::map<std::string, int> status_counts; // keyed by terminal()
    std::vector<std::string> warnings;
};

// Executes the batch and writes the archive: manifest.json, one
// items/<scenario>/<strategy>/run-<k>.json per tuple, and the cassette when
// recording. Per-item failures become records; manifest errors throw.
RunSummary cmd_run(const RunManifest& manifest);

// All item records under <archive_dir>/items, ordered by (scenario, strategy,
// run). Throws StateError when none exist.
std::vector<ItemRecord> load_archive(const std::string& archive_dir);

// Writes report/by_strategy.csv, by_type.csv, errors_by_run.csv,
// error_buckets.csv and report.md under the archive. Byte-deterministic for a
// given archive.
void cmd_report(const std::string& archive_dir);

struct JudgeSummary {
    int judged = 0;
    int successes = 0;
    int unparseable = 0;
    std::optional<stats::ContingencyTable> table; // present when labels given
};

// Judges every archived item that produced code, writing report/verdicts.csv.
// labels_path (optional) maps "<scenario>/<strategy>/<run>" to 0/1 human
// verdicts; when given, report/agreement.csv gets the contingency table and
// agreement statistics. The judge model must differ from the generator.
JudgeSummary cmd_judge(const std::string& archive_dir,
                       const gateway::ModelConfig& judge_config,
                       const std::string& templates_dir,
                       const std::string& labels_path,
                       gateway::CassetteMode cassette_mode,
                       const std::string& cassette_path);

} // namespace reflab::runner
