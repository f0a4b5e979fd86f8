#include "reflab/runner/runner.hpp"

#include "reflab/judge/judge.hpp"
#include "reflab/support/errors.hpp"
#include "reflab/support/fsutil.hpp"
#include "reflab/support/strings.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <filesystem>
#include <map>

namespace reflab::runner {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// "<scenario>/<strategy>/<run>" -> human verdict (1 = success).
std::map<std::string, bool> load_labels(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw SchemaError(fmt::format("labels file is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) throw SchemaError("labels file must be a JSON object");
    std::map<std::string, bool> labels;
    for (const auto& [key, value] : j.items()) {
        if (value.is_boolean()) {
            labels[key] = value.get<bool>();
        } else if (value.is_number_integer()) {
            int v = value.get<int>();
            if (v != 0 && v != 1)
                throw SchemaError(fmt::format("label '{}' must be 0 or 1, got {}", key, v));
            labels[key] = v == 1;
        } else {
            throw SchemaError(fmt::format("label '{}' must be 0/1 or boolean", key));
        }
    }
    return labels;
}

} // namespace

JudgeSummary cmd_judge(const std::string& archive_dir,
                       const gateway::ModelConfig& judge_config,
                       const std::string& templates_dir, const std::string& labels_path,
                       gateway::CassetteMode cassette_mode,
                       const std::string& cassette_path) {
    if (judge_config.model_name.empty())
        throw ConfigurationError("judge needs a model name");
    if (cassette_mode != gateway::CassetteMode::passthrough && cassette_path.empty())
        throw ConfigurationError("cassette mode record/replay needs a cassette path");

    auto records = load_archive(archive_dir);
    auto store = prompt::TemplateStore::load(templates_dir);
    std::map<std::string, bool> labels;
    if (!labels_path.empty()) labels = load_labels(labels_path);

    gateway::Cassette cassette;
    gateway::Cassette* cassette_ptr = nullptr;
    if (cassette_mode != gateway::CassetteMode::passthrough) {
        cassette = gateway::Cassette::open(cassette_path, cassette_mode);
        cassette_ptr = &cassette;
    }

    JudgeSummary summary;
    stats::ContingencyTable table;
    bool any_pair = false;

    std::vector<std::vector<std::string>> rows;
    rows.push_back({"scenario_id", "strategy", "run", "verdict"});
    for (const auto& record : records) {
        if (record.status == "skipped" || record.after_code.empty()) continue;
        judge::JudgeRequest request;
        request.scenario_id = record.scenario_id;
        request.strategy = record.strategy;
        request.before_code = record.before_code;
        request.after_code = record.after_code;
        request.refactoring_type = record.refactoring_type;
        request.generator_model = record.model;
        request.run_index = record.run_index;
        auto verdict = judge::judge(request, judge_config, store, cassette_ptr);

        ++summary.judged;
        std::string verdict_text;
        if (verdict.verdict) {
            verdict_text = *verdict.verdict ? "1" : "0";
            if (*verdict.verdict) ++summary.successes;
        } else {
            ++summary.unparseable;
        }
        rows.push_back({record.scenario_id, record.strategy,
                        fmt::format("{}", record.run_index), verdict_text});

        if (!labels.empty() && verdict.verdict) {
            std::string key = fmt::format("{}/{}/{}", record.scenario_id, record.strategy,
                                          record.run_index);
            auto it = labels.find(key);
            if (it == labels.end()) continue;
            any_pair = true;
            bool j1 = *verdict.verdict, h1 = it->second;
            if (j1 && h1) ++table.a;
            else if (j1 && !h1) ++table.b;
            else if (!j1 && h1) ++table.c;
            else ++table.d;
        }
    }
    if (cassette_ptr && cassette_mode == gateway::CassetteMode::record) cassette.save();

    fs::path report_dir = fs::path(archive_dir) / "report";
    fs::create_directories(report_dir);
    std::string csv;
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) csv += ',';
            csv += row[i];
        }
        csv += '\n';
    }
    write_file_atomic(report_dir / "verdicts.csv", csv);

    if (any_pair) {
        summary.table = table;
        auto agreement = stats::agreement(table);
        auto opt = [](const std::optional<double>& v) {
            return v ? fmt::format("{:.4f}", *v) : std::string("undefined");
        };
        std::string out = "metric,value\n";
        out += fmt::format("a,{}\n", table.a);
        out += fmt::format("b,{}\n", table.b);
        out += fmt::format("c,{}\n", table.c);
        out += fmt::format("d,{}\n", table.d);
        out += fmt::format("n,{}\n", table.n());
        out += fmt::format("p_o,{:.4f}\n", agreement.p_o);
        out += fmt::format("kappa,{}\n", opt(agreement.kappa));
        out += fmt::format("p_pos,{}\n", opt(agreement.p_pos));
        out += fmt::format("p_neg,{}\n", opt(agreement.p_neg));
        out += fmt::format("pabak,{:.4f}\n", agreement.pabak);
        write_file_atomic(report_dir / "agreement.csv", out);
    } else if (!labels.empty()) {
        throw StateError("labels were given but no judged item matched a label key");
    }
    return summary;
}

} // namespace reflab::runner
