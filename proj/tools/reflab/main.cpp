#include "reflab/corpus/corpus.hpp"
#include "reflab/metrics/codebleu.hpp"
#include "reflab/metrics/metrics.hpp"
#include "reflab/runner/runner.hpp"
#include "reflab/support/errors.hpp"
#include "reflab/support/fsutil.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

using namespace reflab;

struct ModelFlags {
    std::string model_name;
    std::string provider = "openai-chat";
    std::string api_base;
    std::string credential_env;
    double temperature = -1.0; // < 0 = provider default
    double timeout_seconds = 120.0;

    void attach(CLI::App* cmd, bool required) {
        auto* opt = cmd->add_option("--model", model_name, "Model name");
        if (required) opt->required();
        cmd->add_option("--provider", provider, "Provider adapter id");
        cmd->add_option("--api-base", api_base, "Provider base URL");
        cmd->add_option("--credential-env", credential_env,
                        "Environment variable holding the API key");
        cmd->add_option("--temperature", temperature, "Sampling temperature");
        cmd->add_option("--request-timeout", timeout_seconds, "Per-request timeout (s)");
    }

    gateway::ModelConfig to_config() const {
        gateway::ModelConfig config;
        config.provider_id = provider;
        config.model_name = model_name;
        config.api_base = api_base;
        config.credential_env = credential_env;
        config.timeout_seconds = timeout_seconds;
        if (temperature >= 0.0) config.sampling["temperature"] = temperature;
        return config;
    }
};

gateway::CassetteMode parse_cassette_mode(const std::string& name) {
    auto mode = gateway::cassette_mode_from_name(name);
    if (!mode)
        throw ConfigurationError(
            fmt::format("unknown cassette mode '{}' (record, replay, off)", name));
    return *mode;
}

std::vector<prompt::Strategy> parse_strategies(const std::vector<std::string>& names) {
    std::vector<prompt::Strategy> strategies;
    if (names.empty()) {
        for (auto strategy : prompt::kAllStrategies) strategies.push_back(strategy);
        return strategies;
    }
    for (const auto& name : names) {
        auto strategy = prompt::strategy_from_name(name);
        if (!strategy)
            throw ConfigurationError(fmt::format("unknown strategy '{}'", name));
        strategies.push_back(*strategy);
    }
    return strategies;
}

int cmd_run_cli(const CLI::App* cmd, const std::string& config_path,
                const std::string& corpus, const std::string& catalog,
                const std::string& templates, const std::vector<std::string>& strategy_names,
                const ModelFlags& model, int runs, const std::string& cassette_mode,
                const std::string& cassette_path, const std::string& out_dir,
                const std::string& run_id, const std::string& repos,
                const std::string& workspace, int workers, int test_reps) {
    runner::RunManifest manifest;
    if (!config_path.empty())
        manifest = runner::manifest_from_json(read_file(config_path));
    auto given = [&](const char* flag) { return cmd->count(flag) > 0; };

    if (given("--corpus")) manifest.corpus_path = corpus;
    if (given("--catalog")) manifest.catalog_path = catalog;
    if (given("--templates")) manifest.templates_dir = templates;
    if (given("--strategies") || manifest.strategies.empty())
        manifest.strategies = parse_strategies(strategy_names);
    if (given("--model") || manifest.model.model_name.empty()) {
        auto flag_model = model.to_config();
        if (given("--model")) manifest.model.model_name = flag_model.model_name;
        if (given("--provider")) manifest.model.provider_id = flag_model.provider_id;
        if (given("--api-base")) manifest.model.api_base = flag_model.api_base;
        if (given("--credential-env")) manifest.model.credential_env = flag_model.credential_env;
        if (given("--temperature")) manifest.model.sampling = flag_model.sampling;
        if (given("--request-timeout"))
            manifest.model.timeout_seconds = flag_model.timeout_seconds;
    }
    if (given("--runs")) manifest.runs_per_scenario = runs;
    if (given("--cassette")) manifest.cassette_mode = parse_cassette_mode(cassette_mode);
    if (given("--cassette-path")) manifest.cassette_path = cassette_path;
    if (given("--out") || manifest.out_dir.empty()) manifest.out_dir = out_dir;
    if (given("--run-id")) manifest.run_id = run_id;
    if (given("--repos")) manifest.repos_config_path = repos;
    if (given("--workspace") || manifest.workspace_root.empty())
        manifest.workspace_root = workspace;
    if (given("--workers")) manifest.workers = workers;
    if (given("--test-reps")) manifest.test_repetitions = test_reps;

    auto summary = runner::cmd_run(manifest);
    fmt::print("archive: {}\n", summary.archive_dir);
    fmt::print("items: {}\n", summary.items);
    for (const auto& [status, count] : summary.status_counts)
        fmt::print("  {}: {}\n", status, count);
    for (const auto& warning : summary.warnings)
        fmt::print(stderr, "warning: {}\n", warning);
    return 0;
}

int cmd_metrics_cli(const std::string& candidate_path, const std::string& reference_path) {
    std::string candidate = read_file(candidate_path);
    nlohmann::json out;
    out["loc"] = metrics::loc(candidate);
    try {
        auto report = metrics::cyclomatic_complexity(candidate);
        out["cyclomatic"] = report.total;
        nlohmann::json callables = nlohmann::json::array();
        for (const auto& callable : report.callables)
            callables.push_back({{"name", callable.name}, {"value", callable.value}});
        out["callables"] = callables;
        out["fan_out"] = metrics::fan_out(candidate);
    } catch (const MetricUnavailableError& e) {
        out["parse_error"] = e.what();
    }
    if (!reference_path.empty()) {
        auto result = metrics::codebleu(candidate, read_file(reference_path));
        out["codebleu"] = {{"ngram", result.ngram},
                           {"weighted_ngram", result.weighted_ngram},
                           {"ast_match", result.ast_match},
                           {"dataflow_match", result.dataflow_match},
                           {"combined", result.combined}};
    }
    fmt::print("{}\n", out.dump(2));
    return 0;
}

int cmd_validate_corpus_cli(const std::string& corpus_path, const std::string& catalog_path) {
    auto scenarios = corpus::load_scenarios(corpus_path);
    int benchmark = 0, real = 0;
    for (const auto& scenario : scenarios)
        scenario.dataset == corpus::Dataset::benchmark ? ++benchmark : ++real;
    fmt::print("{} scenario(s): {} benchmark, {} real\n", scenarios.size(), benchmark, real);
    if (!catalog_path.empty()) {
        auto catalog = corpus::load_catalog(catalog_path);
        corpus::validate_against_catalog(scenarios, catalog);
        fmt::print("catalog: {} type(s), {} with rules\n", catalog.entries.size(),
                   catalog.rule_supported_count);
        for (const auto& warning : catalog.warnings)
            fmt::print(stderr, "warning: {}\n", warning);
        fmt::print("all scenario types resolve against the catalog\n");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch harness for LLM-driven Java refactoring evaluation"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Execute a batch and archive every item");
    std::string config_path, corpus, catalog, templates;
    std::string cassette_mode = "replay", cassette_path;
    std::string out_dir = "runs", run_id, repos, workspace = "workspaces";
    std::vector<std::string> strategy_names;
    int runs = 5, workers = 1, test_reps = 5;
    ModelFlags run_model;
    run->add_option("--config", config_path, "Run manifest JSON; flags override its fields");
    run->add_option("--corpus", corpus, "Scenario JSON file");
    run->add_option("--catalog", catalog, "Refactoring catalog JSON file");
    run->add_option("--templates", templates, "Prompt template directory");
    run->add_option("--strategies", strategy_names,
                    "Strategies to run (default: all five)")
        ->delimiter(',');
    run_model.attach(run, false);
    run->add_option("--runs", runs, "Completions per scenario/strategy (default 5)");
    run->add_option("--cassette", cassette_mode, "record | replay | off");
    run->add_option("--cassette-path", cassette_path, "Cassette file");
    run->add_option("--out", out_dir, "Archive parent directory");
    run->add_option("--run-id", run_id, "Archive directory name (default: timestamp)");
    run->add_option("--repos", repos, "Repository build/test config JSON");
    run->add_option("--workspace", workspace, "Clone parent directory");
    run->add_option("--workers", workers, "Concurrent batch workers");
    run->add_option("--test-reps", test_reps, "Test-suite repetitions per variant");

    // report
    auto* report = app.add_subcommand("report", "Render CSV/Markdown tables from an archive");
    std::string report_archive;
    report->add_option("archive", report_archive, "Archive directory")->required();

    // judge
    auto* judge = app.add_subcommand("judge", "LLM-judge archived outputs");
    std::string judge_archive, judge_templates, labels;
    std::string judge_cassette_mode = "replay", judge_cassette_path;
    ModelFlags judge_model;
    judge->add_option("archive", judge_archive, "Archive directory")->required();
    judge->add_option("--templates", judge_templates, "Prompt template directory")->required();
    judge_model.attach(judge, true);
    judge->add_option("--labels", labels, "Human labels JSON for agreement statistics");
    judge->add_option("--cassette", judge_cassette_mode, "record | replay | off");
    judge->add_option("--cassette-path", judge_cassette_path, "Cassette file");

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "Code metrics for one fragment");
    std::string candidate, reference;
    metrics_cmd->add_option("--candidate", candidate, "Fragment file")->required();
    metrics_cmd->add_option("--reference", reference, "Reference file (enables CodeBLEU)");

    // validate-corpus
    auto* validate = app.add_subcommand("validate-corpus", "Check corpus and catalog files");
    std::string vc_corpus, vc_catalog;
    validate->add_option("--corpus", vc_corpus, "Scenario JSON file")->required();
    validate->add_option("--catalog", vc_catalog, "Refactoring catalog JSON file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run_cli(run, config_path, corpus, catalog, templates, strategy_names,
                               run_model, runs, cassette_mode, cassette_path, out_dir, run_id,
                               repos, workspace, workers, test_reps);
        if (report->parsed()) {
            runner::cmd_report(report_archive);
            fmt::print("report written under {}/report\n", report_archive);
            return 0;
        }
        if (judge->parsed()) {
            auto summary = runner::cmd_judge(judge_archive, judge_model.to_config(),
                                             judge_templates, labels,
                                             parse_cassette_mode(judge_cassette_mode),
                                             judge_cassette_path);
            fmt::print("judged: {} ({} success, {} unparseable)\n", summary.judged,
                       summary.successes, summary.unparseable);
            if (summary.table)
                fmt::print("agreement table: a={} b={} c={} d={}\n", summary.table->a,
                           summary.table->b, summary.table->c, summary.table->d);
            return 0;
        }
        if (metrics_cmd->parsed()) return cmd_metrics_cli(candidate, reference);
        if (validate->parsed()) return cmd_validate_corpus_cli(vc_corpus, vc_catalog);
    } catch (const Error& e) {
        fmt::print(stderr, "error ({}): {}\n", e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
