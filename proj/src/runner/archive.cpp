#include "reflab/runner/runner.hpp"

#include "reflab/support/errors.hpp"
#include "reflab/support/fsutil.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>

namespace reflab::runner {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ItemRecord::terminal() const {
    if (!stage.empty() && (status == "patch-failed" || status == "skipped"))
        return fmt::format("{}({})", status, stage);
    return status;
}

std::string item_to_json(const ItemRecord& r) {
    json j;
    j["scenario_id"] = r.scenario_id;
    j["refactoring_type"] = r.refactoring_type;
    j["dataset"] = r.dataset;
    j["strategy"] = r.strategy;
    j["model"] = r.model;
    j["run_index"] = r.run_index;
    j["status"] = r.status;
    if (!r.stage.empty()) j["stage"] = r.stage;
    j["failure_kind"] = r.failure_kind.empty() ? "none" : r.failure_kind;
    if (!r.error.empty()) j["error"] = r.error;
    j["prompt_hash"] = r.prompt_hash;
    j["latency_ms"] = r.latency_ms;
    j["raw_text"] = r.raw_text;
    j["before_code"] = r.before_code;
    j["after_code"] = r.after_code;
    j["warnings"] = r.warnings;
    j["fragments"] = {{"methods", r.methods}, {"classes", r.classes}, {"others", r.others}};

    json metrics = json::object();
    if (r.loc) metrics["loc"] = *r.loc;
    if (r.cyclomatic) metrics["cyclomatic"] = *r.cyclomatic;
    if (r.fan_out) metrics["fan_out"] = *r.fan_out;
    if (r.codebleu) metrics["codebleu"] = *r.codebleu;
    j["metrics"] = metrics;

    json validation = json::object();
    if (r.compiled) validation["compiled"] = *r.compiled;
    if (!r.compiler_error_buckets.empty())
        validation["compiler_error_buckets"] = r.compiler_error_buckets;
    if (r.new_failed) validation["new_failed"] = *r.new_failed;
    if (r.new_errored) validation["new_errored"] = *r.new_errored;
    if (r.unstable) validation["unstable"] = *r.unstable;
    if (r.test_runs > 0) validation["test_runs"] = r.test_runs;
    j["validation"] = validation;

    return j.dump(2) + "\n";
}

ItemRecord item_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SchemaError(fmt::format("item record is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) throw SchemaError("item record must be a JSON object");

    ItemRecord r;
    auto str = [&](const char* key, std::string& out, bool required) {
        auto it = j.find(key);
        if (it == j.end()) {
            if (required)
                throw SchemaError(fmt::format("item record is missing field '{}'", key));
            return;
        }
        if (!it->is_string())
            throw SchemaError(fmt::format("item record field '{}' must be a string", key));
        out = it->get<std::string>();
    };
    str("scenario_id", r.scenario_id, true);
    str("refactoring_type", r.refactoring_type, true);
    str("dataset", r.dataset, true);
    str("strategy", r.strategy, true);
    str("model", r.model, false);
    str("status", r.status, true);
    str("stage", r.stage, false);
    str("failure_kind", r.failure_kind, true);
    str("error", r.error, false);
    str("prompt_hash", r.prompt_hash, false);
    str("raw_text", r.raw_text, false);
    str("before_code", r.before_code, false);
    str("after_code", r.after_code, false);

    r.run_index = j.at("run_index").get<int>();
    if (j.contains("latency_ms")) r.latency_ms = j["latency_ms"].get<double>();
    if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
    if (j.contains("fragments")) {
        const auto& f = j["fragments"];
        r.methods = f.value("methods", 0);
        r.classes = f.value("classes", 0);
        r.others = f.value("others", 0);
    }
    if (j.contains("metrics")) {
        const auto& m = j["metrics"];
        if (m.contains("loc")) r.loc = m["loc"].get<int>();
        if (m.contains("cyclomatic")) r.cyclomatic = m["cyclomatic"].get<int>();
        if (m.contains("fan_out")) r.fan_out = m["fan_out"].get<int>();
        if (m.contains("codebleu")) r.codebleu = m["codebleu"].get<double>();
    }
    if (j.contains("validation")) {
        const auto& v = j["validation"];
        if (v.contains("compiled")) r.compiled = v["compiled"].get<bool>();
        if (v.contains("compiler_error_buckets"))
            r.compiler_error_buckets =
                v["compiler_error_buckets"].get<std::map<std::string, int>>();
        if (v.contains("new_failed")) r.new_failed = v["new_failed"].get<int>();
        if (v.contains("new_errored")) r.new_errored = v["new_errored"].get<int>();
        if (v.contains("unstable")) r.unstable = v["unstable"].get<bool>();
        if (v.contains("test_runs")) r.test_runs = v["test_runs"].get<int>();
    }
    return r;
}

RunManifest manifest_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SchemaError(fmt::format("run config is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) throw SchemaError("run config must be a JSON object");

    RunManifest m;
    auto str = [&](const json& node, const char* key, std::string& out) {
        auto it = node.find(key);
        if (it == node.end()) return;
        if (!it->is_string())
            throw SchemaError(fmt::format("run config field '{}' must be a string", key));
        out = it->get<std::string>();
    };
    str(j, "corpus", m.corpus_path);
    str(j, "catalog", m.catalog_path);
    str(j, "templates", m.templates_dir);
    str(j, "out_dir", m.out_dir);
    str(j, "run_id", m.run_id);
    str(j, "repos_config", m.repos_config_path);
    str(j, "workspace_root", m.workspace_root);
    if (j.contains("strategies")) {
        if (!j["strategies"].is_array())
            throw SchemaError("run config field 'strategies' must be a list");
        for (const auto& name : j["strategies"]) {
            auto strategy = prompt::strategy_from_name(name.get<std::string>());
            if (!strategy)
                throw SchemaError(fmt::format("run config lists unknown strategy '{}'",
                                              name.get<std::string>()));
            m.strategies.push_back(*strategy);
        }
    }
    if (j.contains("model")) {
        const auto& node = j["model"];
        str(node, "model_name", m.model.model_name);
        str(node, "provider_id", m.model.provider_id);
        str(node, "api_base", m.model.api_base);
        str(node, "credential_env", m.model.credential_env);
        if (node.contains("sampling"))
            m.model.sampling = node["sampling"].get<std::map<std::string, double>>();
        if (node.contains("timeout_seconds"))
            m.model.timeout_seconds = node["timeout_seconds"].get<double>();
    }
    if (j.contains("runs_per_scenario")) m.runs_per_scenario = j["runs_per_scenario"].get<int>();
    if (j.contains("workers")) m.workers = j["workers"].get<int>();
    if (j.contains("test_repetitions")) m.test_repetitions = j["test_repetitions"].get<int>();
    if (j.contains("cassette")) {
        const auto& node = j["cassette"];
        if (node.contains("mode")) {
            auto mode = gateway::cassette_mode_from_name(node["mode"].get<std::string>());
            if (!mode)
                throw SchemaError(fmt::format("run config names unknown cassette mode '{}'",
                                              node["mode"].get<std::string>()));
            m.cassette_mode = *mode;
        }
        str(node, "path", m.cassette_path);
    }
    return m;
}

std::vector<ItemRecord> load_archive(const std::string& archive_dir) {
    fs::path items_dir = fs::path(archive_dir) / "items";
    std::vector<ItemRecord> records;
    if (fs::is_directory(items_dir)) {
        std::vector<fs::path> paths;
        for (const auto& entry : fs::recursive_directory_iterator(items_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                paths.push_back(entry.path());
        std::sort(paths.begin(), paths.end());
        records.reserve(paths.size());
        for (const auto& path : paths) {
            try {
                records.push_back(item_from_json(read_file(path)));
            } catch (const SchemaError& e) {
                throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
            }
        }
    }
    if (records.empty())
        throw StateError(fmt::format("archive contains no item records: {}", archive_dir));

    auto strategy_rank = [](const std::string& name) {
        int rank = 0;
        for (auto strategy : prompt::kAllStrategies) {
            if (prompt::strategy_name(strategy) == name) return rank;
            ++rank;
        }
        return rank; // unknown names sort after the known five
    };
    std::sort(records.begin(), records.end(), [&](const ItemRecord& a, const ItemRecord& b) {
        if (a.scenario_id != b.scenario_id) return a.scenario_id < b.scenario_id;
        int ra = strategy_rank(a.strategy), rb = strategy_rank(b.strategy);
        if (ra != rb) return ra < rb;
        if (a.strategy != b.strategy) return a.strategy < b.strategy;
        return a.run_index < b.run_index;
    });
    return records;
}

} // namespace reflab::runner
