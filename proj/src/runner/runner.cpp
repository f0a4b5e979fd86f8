#include "reflab/runner/runner.hpp"

#include "reflab/corpus/corpus.hpp"
#include "reflab/extract/extract.hpp"
#include "reflab/java/patch.hpp"
#include "reflab/metrics/codebleu.hpp"
#include "reflab/metrics/metrics.hpp"
#include "reflab/support/errors.hpp"
#include "reflab/support/fsutil.hpp"
#include "reflab/verify/verify.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

namespace reflab::runner {

namespace fs = std::filesystem;
using nlohmann::json;

void validate_manifest(const RunManifest& manifest) {
    if (manifest.corpus_path.empty())
        throw ConfigurationError("run manifest needs a corpus path");
    if (manifest.catalog_path.empty())
        throw ConfigurationError("run manifest needs a catalog path");
    if (manifest.templates_dir.empty())
        throw ConfigurationError("run manifest needs a templates directory");
    if (manifest.out_dir.empty())
        throw ConfigurationError("run manifest needs an output directory");
    if (manifest.strategies.empty())
        throw ConfigurationError("run manifest needs at least one strategy");
    std::set<prompt::Strategy> seen;
    for (auto strategy : manifest.strategies)
        if (!seen.insert(strategy).second)
            throw ConfigurationError(fmt::format("strategy '{}' listed more than once",
                                                 prompt::strategy_name(strategy)));
    if (manifest.runs_per_scenario < 1)
        throw ConfigurationError(fmt::format("runs_per_scenario must be >= 1, got {}",
                                             manifest.runs_per_scenario));
    if (manifest.workers < 1)
        throw ConfigurationError(fmt::format("workers must be >= 1, got {}", manifest.workers));
    if (manifest.test_repetitions < 1)
        throw ConfigurationError(fmt::format("test_repetitions must be >= 1, got {}",
                                             manifest.test_repetitions));
    if (manifest.model.model_name.empty())
        throw ConfigurationError("run manifest needs a model name");
    if (manifest.cassette_mode != gateway::CassetteMode::passthrough &&
        manifest.cassette_path.empty())
        throw ConfigurationError("cassette mode record/replay needs a cassette path");
}

namespace {

std::string default_run_id() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm utc{};
    gmtime_r(&t, &utc);
    return fmt::format("run-{:04}{:02}{:02}T{:02}{:02}{:02}Z", utc.tm_year + 1900,
                       utc.tm_mon + 1, utc.tm_mday, utc.tm_hour, utc.tm_min, utc.tm_sec);
}

std::string manifest_snapshot(const RunManifest& manifest, const std::string& run_id,
                              const std::string& template_version, int scenario_count) {
    json j;
    j["run_id"] = run_id;
    j["corpus"] = manifest.corpus_path;
    j["catalog"] = manifest.catalog_path;
    j["templates"] = manifest.templates_dir;
    j["template_version"] = template_version;
    j["scenario_count"] = scenario_count;
    json strategies = json::array();
    for (auto strategy : manifest.strategies)
        strategies.push_back(prompt::strategy_name(strategy));
    j["strategies"] = strategies;
    j["model"] = {{"provider_id", manifest.model.provider_id},
                  {"model_name", manifest.model.model_name},
                  {"api_base", manifest.model.api_base},
                  {"credential_env", manifest.model.credential_env},
                  {"sampling", manifest.model.sampling}};
    j["runs_per_scenario"] = manifest.runs_per_scenario;
    j["cassette"] = {{"mode", gateway::cassette_mode_name(manifest.cassette_mode)},
                     {"path", manifest.cassette_path}};
    j["repos_config"] = manifest.repos_config_path;
    j["workspace_root"] = manifest.workspace_root;
    j["workers"] = manifest.workers;
    j["test_repetitions"] = manifest.test_repetitions;
    return j.dump(2) + "\n";
}

// Everything shared by the worker threads. Workspace checkouts mutate the
// clone's working tree, so all verify-harness work for one repository holds
// that repository's mutex; the baseline test reports live behind the same
// lock.
struct RepoState {
    std::mutex mutex;
    std::map<std::string, std::vector<verify::TestReport>> baseline_reports;
};

struct BatchContext {
    const RunManifest* manifest = nullptr;
    const corpus::Catalog* catalog = nullptr;
    const prompt::TemplateStore* store = nullptr;
    std::map<std::string, verify::RepoConfig> repo_configs;
    gateway::Cassette* cassette = nullptr;

    std::mutex repo_registry_mutex;
    std::map<std::string, std::unique_ptr<RepoState>> repo_states;

    RepoState& repo_state(const std::string& key) {
        std::lock_guard lock(repo_registry_mutex);
        auto& slot = repo_states[key];
        if (!slot) slot = std::make_unique<RepoState>();
        return *slot;
    }
};

std::string skip_stage_for(const std::string& failure_reason) {
    auto colon = failure_reason.find(':');
    if (colon == std::string::npos || colon == 0) return "completion";
    return failure_reason.substr(0, colon);
}

void apply_fragment_metrics(ItemRecord& record, const corpus::RefactoringScenario& scenario) {
    if (record.after_code.empty()) return;
    record.loc = metrics::loc(record.after_code);
    try {
        record.cyclomatic = metrics::cyclomatic_complexity(record.after_code).total;
    } catch (const MetricUnavailableError&) {
    }
    try {
        record.fan_out = metrics::fan_out(record.after_code);
    } catch (const MetricUnavailableError&) {
    }
    if (scenario.ground_truth_after) {
        try {
            record.codebleu =
                metrics::codebleu(record.after_code, *scenario.ground_truth_after).combined;
        } catch (const UndefinedMetricError&) {
        }
    }
}

// Compile-and-test stage for one applied patch; fills the validation fields
// as far as the pipeline gets. Caller holds the repository mutex.
void verify_variant(ItemRecord& record, const corpus::RefactoringScenario& scenario,
                    BatchContext& ctx, const verify::RepoConfig& config,
                    const std::string& repo_key, RepoState& repo) {
    const RunManifest& manifest = *ctx.manifest;
    fs::path clone_path = fs::path(manifest.workspace_root) / repo_key;
    auto workspace = verify::Workspace::prepare(config, *scenario.commit_before,
                                                clone_path.string());

    // Re-anchor the patch on the checked-out file rather than the corpus
    // snippet: the corpus stores the method, the repository stores the file.
    workspace.checkout(workspace.baseline_revision());
    fs::path target_file = fs::path(workspace.root()) / *scenario.path_before;
    if (!fs::is_regular_file(target_file))
        throw WorkspaceError(fmt::format("file '{}' not found at baseline revision {}",
                                         *scenario.path_before, *scenario.commit_before));
    std::string baseline_text = read_file(target_file);
    auto parsed = java::parse_source(baseline_text);
    if (parsed.stage != java::ParseStage::ok || !parsed.tree)
        throw WorkspaceError(fmt::format("baseline file '{}' does not parse: {}",
                                         *scenario.path_before, parsed.message));

    java::PatchPlan plan;
    plan.target_kind = scenario.target_kind == corpus::TargetKind::method
                           ? java::TargetKind::method
                           : java::TargetKind::clazz;
    plan.target_name = scenario.target_name.value_or("");
    plan.replacement_fragment = record.after_code;
    auto patch = java::apply_patch(*parsed.tree, plan);
    if (patch.status != java::PatchResult::Status::applied) {
        record.status = "patch-failed";
        record.stage = patch.failure_stage ? java::stage_name(*patch.failure_stage) : "parsing";
        record.failure_kind = record.stage;
        record.error = patch.message;
        return;
    }
    record.status = "applied";

    std::string branch = workspace.commit_variant({{*scenario.path_before, *patch.patched_text}},
                                                  scenario.id, record.strategy,
                                                  record.run_index);
    if (config.build_cmd.empty()) {
        record.warnings.push_back("no build command configured; compile/test skipped");
        return;
    }
    auto compile_result = verify::compile(workspace, branch, config);
    record.compiled = compile_result.success;
    if (!compile_result.success) {
        record.status = "compile-failed";
        record.failure_kind = "compilation";
        record.compiler_error_buckets = verify::bucket_compiler_errors(compile_result.diagnostics);
        return;
    }
    if (config.test_cmd.empty()) {
        record.warnings.push_back("no test command configured; validation skipped");
        return;
    }

    std::string baseline_key = fmt::format("{}@{}", repo_key, workspace.baseline_revision());
    auto cached = repo.baseline_reports.find(baseline_key);
    if (cached == repo.baseline_reports.end()) {
        auto reports = verify::run_tests(workspace, workspace.baseline_revision(), config,
                                         manifest.test_repetitions);
        cached = repo.baseline_reports.emplace(baseline_key, std::move(reports)).first;
    }
    auto variant_reports = verify::run_tests(workspace, branch, config,
                                             manifest.test_repetitions);
    auto outcome = verify::diff_outcomes(cached->second, variant_reports);
    record.status = "validated";
    record.new_failed = outcome.new_failed;
    record.new_errored = outcome.new_errored;
    record.unstable = outcome.unstable;
    record.test_runs = outcome.runs;
}

void process_real_scenario(ItemRecord& record, const corpus::RefactoringScenario& scenario,
                           BatchContext& ctx) {
    if (!scenario.repository || !scenario.commit_before || !scenario.path_before) {
        record.status = "skipped";
        record.stage = "missing-repo-metadata";
        record.error = "real scenario lacks repository/commit/path metadata";
        return;
    }
    const std::string& repo_key = *scenario.repository;
    auto config_it = ctx.repo_configs.find(repo_key);
    if (config_it == ctx.repo_configs.end()) {
        record.status = "skipped";
        record.stage = "no-repo-config";
        record.error = fmt::format("no build/test configuration for repository '{}'", repo_key);
        return;
    }
    RepoState& repo = ctx.repo_state(repo_key);
    std::lock_guard repo_lock(repo.mutex);
    try {
        verify_variant(record, scenario, ctx, config_it->second, repo_key, repo);
    } catch (const BaselineError& e) {
        record.status = "skipped";
        record.stage = "invalid-baseline";
        record.error = e.what();
    } catch (const TargetMissingError& e) {
        record.status = "patch-failed";
        record.stage = "target-missing";
        record.failure_kind = "other";
        record.error = e.what();
    } catch (const AmbiguityError& e) {
        record.status = "patch-failed";
        record.stage = "ambiguity";
        record.failure_kind = "other";
        record.error = e.what();
    } catch (const Error& e) {
        // Workspace, environment, state, and harness problems: the item keeps
        // whatever stage it reached; the batch moves on.
        if (record.status.empty() || record.status == "applied") {
            if (record.status.empty()) {
                record.status = "skipped";
                record.stage = e.kind();
            }
            record.error = e.what();
        } else {
            record.error = e.what();
        }
    }
}

ItemRecord process_item(const corpus::RefactoringScenario& scenario,
                        prompt::Strategy strategy, const gateway::CompletionRecord& completion,
                        BatchContext& ctx) {
    ItemRecord record;
    record.scenario_id = scenario.id;
    record.refactoring_type = scenario.refactoring_type;
    record.dataset = corpus::dataset_name(scenario.dataset);
    record.strategy = prompt::strategy_name(strategy);
    record.model = ctx.manifest->model.model_name;
    record.run_index = completion.run_index;
    record.prompt_hash = completion.prompt_hash;
    record.latency_ms = completion.latency_ms;
    record.raw_text = completion.raw_text;
    record.before_code = scenario.before_code;
    record.failure_kind = "none";

    if (completion.failed) {
        record.status = "skipped";
        record.stage = skip_stage_for(completion.failure_reason);
        record.error = completion.failure_reason;
        return record;
    }

    auto extracted = extract::extract(completion.raw_text);
    record.methods = static_cast<int>(extracted.methods.size());
    record.classes = static_cast<int>(extracted.classes.size());
    record.others = static_cast<int>(extracted.others.size());

    bool benchmark = scenario.dataset == corpus::Dataset::benchmark;
    try {
        auto primary = extract::primary_fragment(extracted, scenario.target_kind,
                                                 scenario.target_name.value_or(""));
        record.after_code = primary.text;
        record.warnings = primary.warnings;
    } catch (const MissingFragmentError& e) {
        record.failure_kind = "other";
        record.error = e.what();
        if (benchmark) {
            record.status = "judged-only";
        } else {
            record.status = "patch-failed";
            record.stage = "missing-fragment";
        }
        return record;
    }

    auto kind = scenario.target_kind == corpus::TargetKind::method ? java::TargetKind::method
                                                                   : java::TargetKind::clazz;
    auto outcome = java::parse_fragment(record.after_code, kind);
    if (outcome.stage != java::ParseStage::ok)
        record.failure_kind = java::stage_name(outcome.stage);

    apply_fragment_metrics(record, scenario);

    if (benchmark) {
        // Benchmark answers are judged, not compiled; the pipeline stops here.
        record.status = "judged-only";
        return record;
    }
    if (outcome.stage != java::ParseStage::ok) {
        record.status = "patch-failed";
        record.stage = java::stage_name(outcome.stage);
        record.error = outcome.message;
        return record;
    }
    process_real_scenario(record, scenario, ctx);
    return record;
}

} // namespace

RunSummary cmd_run(const RunManifest& manifest) {
    validate_manifest(manifest);

    auto scenarios = corpus::load_scenarios(manifest.corpus_path);
    auto catalog = corpus::load_catalog(manifest.catalog_path);
    corpus::validate_against_catalog(scenarios, catalog);
    auto store = prompt::TemplateStore::load(manifest.templates_dir);

    BatchContext ctx;
    ctx.manifest = &manifest;
    ctx.catalog = &catalog;
    ctx.store = &store;
    if (!manifest.repos_config_path.empty())
        ctx.repo_configs = verify::load_repo_configs(manifest.repos_config_path);

    std::string run_id = manifest.run_id.empty() ? default_run_id() : manifest.run_id;
    fs::path archive_dir = fs::path(manifest.out_dir) / run_id;
    if (fs::exists(archive_dir / "items"))
        throw StateError(fmt::format("archive already exists: {}", archive_dir.string()));
    fs::create_directories(archive_dir / "items");

    gateway::Cassette cassette;
    if (manifest.cassette_mode != gateway::CassetteMode::passthrough) {
        cassette = gateway::Cassette::open(manifest.cassette_path, manifest.cassette_mode);
        ctx.cassette = &cassette;
    }

    struct WorkUnit {
        const corpus::RefactoringScenario* scenario;
        prompt::Strategy strategy;
    };
    std::vector<WorkUnit> units;
    for (const auto& scenario : scenarios)
        for (auto strategy : manifest.strategies)
            units.push_back({&scenario, strategy});

    std::vector<std::vector<ItemRecord>> results(units.size());
    std::atomic<size_t> next{0};
    std::mutex warnings_mutex;
    std::vector<std::string> batch_warnings;

    auto run_unit = [&](size_t index) {
        const auto& unit = units[index];
        const auto& scenario = *unit.scenario;
        std::vector<ItemRecord>& out = results[index];

        auto skipped_all = [&](const std::string& stage, const std::string& detail) {
            for (int run = 1; run <= manifest.runs_per_scenario; ++run) {
                ItemRecord record;
                record.scenario_id = scenario.id;
                record.refactoring_type = scenario.refactoring_type;
                record.dataset = corpus::dataset_name(scenario.dataset);
                record.strategy = prompt::strategy_name(unit.strategy);
                record.model = manifest.model.model_name;
                record.run_index = run;
                record.status = "skipped";
                record.stage = stage;
                record.failure_kind = "none";
                record.error = detail;
                out.push_back(std::move(record));
            }
        };

        std::set<prompt::Strategy> supported;
        try {
            supported = prompt::supported_strategies(scenario.refactoring_type, catalog);
        } catch (const Error& e) {
            skipped_all("catalog", e.what());
            return;
        }
        if (!supported.count(unit.strategy)) {
            skipped_all("unsupported-strategy",
                        fmt::format("strategy '{}' is not available for type '{}'",
                                    prompt::strategy_name(unit.strategy),
                                    scenario.refactoring_type));
            return;
        }

        std::vector<gateway::CompletionRecord> completions;
        std::vector<std::string> unit_warnings;
        try {
            completions = gateway::run_batch(scenario, unit.strategy, catalog, store,
                                             manifest.model, manifest.runs_per_scenario,
                                             ctx.cassette, &unit_warnings);
        } catch (const Error& e) {
            skipped_all(e.kind(), e.what());
            return;
        }
        if (!unit_warnings.empty()) {
            std::lock_guard lock(warnings_mutex);
            for (auto& w : unit_warnings)
                batch_warnings.push_back(fmt::format("{}/{}: {}", scenario.id,
                                                     prompt::strategy_name(unit.strategy), w));
        }
        for (const auto& completion : completions)
            out.push_back(process_item(scenario, unit.strategy, completion, ctx));
    };

    int worker_count = std::min<int>(manifest.workers, static_cast<int>(units.size()));
    if (worker_count <= 1) {
        for (size_t i = 0; i < units.size(); ++i) run_unit(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(worker_count);
        for (int w = 0; w < worker_count; ++w) {
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < units.size(); i = next.fetch_add(1))
                    run_unit(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    RunSummary summary;
    summary.archive_dir = archive_dir.string();
    summary.warnings = std::move(batch_warnings);
    for (const auto& unit_records : results) {
        for (const auto& record : unit_records) {
            fs::path item_dir = archive_dir / "items" / record.scenario_id / record.strategy;
            fs::create_directories(item_dir);
            write_file_atomic(item_dir / fmt::format("run-{}.json", record.run_index),
                              item_to_json(record));
            ++summary.items;
            ++summary.status_counts[record.terminal()];
        }
    }

    write_file_atomic(archive_dir / "manifest.json",
                      manifest_snapshot(manifest, run_id, store.version(),
                                        static_cast<int>(scenarios.size())));
    if (ctx.cassette) {
        if (manifest.cassette_mode == gateway::CassetteMode::record) cassette.save();
        if (fs::is_regular_file(manifest.cassette_path))
            fs::copy_file(manifest.cassette_path, archive_dir / "cassette.json",
                          fs::copy_options::overwrite_existing);
    }
    return summary;
}

} // namespace reflab::runner
