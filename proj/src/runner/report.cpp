#include "reflab/runner/runner.hpp"

#include "reflab/stats/aggregate.hpp"
#include "reflab/support/errors.hpp"
#include "reflab/support/fsutil.hpp"
#include "reflab/support/strings.hpp"
#include "reflab/verify/verify.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

namespace reflab::runner {

namespace fs = std::filesystem;

namespace {

std::string csv_cell(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    return "\"" + strings::replace_all(value, "\"", "\"\"") + "\"";
}

std::string md_cell(const std::string& value) {
    return strings::replace_all(value, "|", "\\|");
}

// m±s over the collected samples, "" when none were collected.
std::string cell(const std::vector<double>& samples) {
    if (samples.empty()) return "";
    return stats::format_mean_std(stats::aggregate(samples));
}

struct StrategyRow {
    int n = 0; // items that reached a compile verdict
    std::vector<double> compiled;
    std::vector<double> new_failed;
    std::vector<double> new_errored;
};

struct TypeRow {
    int n = 0; // attempted (non-skipped) items
    std::vector<double> loc, cyclomatic, fan_out, codebleu;
    std::vector<double> compiled, new_failed, new_errored;
};

struct RunRow {
    int attempts = 0;
    int lexical = 0;
    int parsing = 0;
    int compilation = 0;
    int other = 0;
};

struct Tables {
    std::vector<std::pair<std::string, StrategyRow>> by_strategy; // canonical order
    std::map<std::string, TypeRow> by_type;
    std::map<int, RunRow> by_run;
    std::vector<std::pair<std::string, int>> buckets; // Table-6 order, then "other"
};

Tables build_tables(const std::vector<ItemRecord>& records) {
    std::map<std::string, StrategyRow> strategy_rows;
    Tables tables;
    std::map<std::string, int> bucket_totals;

    for (const auto& r : records) {
        auto& run_row = tables.by_run[r.run_index]; // row exists even if all skipped
        if (r.status != "skipped") {
            auto& type_row = tables.by_type[r.refactoring_type];
            ++type_row.n;
            if (r.loc) type_row.loc.push_back(*r.loc);
            if (r.cyclomatic) type_row.cyclomatic.push_back(*r.cyclomatic);
            if (r.fan_out) type_row.fan_out.push_back(*r.fan_out);
            if (r.codebleu) type_row.codebleu.push_back(*r.codebleu);

            ++run_row.attempts;
            if (r.failure_kind == "lexical") ++run_row.lexical;
            else if (r.failure_kind == "parsing") ++run_row.parsing;
            else if (r.failure_kind == "compilation") ++run_row.compilation;
            else if (r.failure_kind == "other") ++run_row.other;
        }
        if (r.compiled) {
            auto& srow = strategy_rows[r.strategy];
            auto& trow = tables.by_type[r.refactoring_type];
            ++srow.n;
            srow.compiled.push_back(*r.compiled ? 1.0 : 0.0);
            trow.compiled.push_back(*r.compiled ? 1.0 : 0.0);
            if (r.new_failed) {
                srow.new_failed.push_back(*r.new_failed);
                trow.new_failed.push_back(*r.new_failed);
            }
            if (r.new_errored) {
                srow.new_errored.push_back(*r.new_errored);
                trow.new_errored.push_back(*r.new_errored);
            }
        }
        for (const auto& [bucket, count] : r.compiler_error_buckets)
            bucket_totals[bucket] += count;
    }

    for (auto strategy : prompt::kAllStrategies) {
        auto it = strategy_rows.find(prompt::strategy_name(strategy));
        if (it != strategy_rows.end() && it->second.n > 0)
            tables.by_strategy.emplace_back(it->first, it->second);
    }
    for (const auto& name : verify::bucket_names())
        tables.buckets.emplace_back(name, bucket_totals.count(name) ? bucket_totals[name] : 0);
    tables.buckets.emplace_back("other",
                                bucket_totals.count("other") ? bucket_totals["other"] : 0);
    return tables;
}

std::string render_csv(const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_cell(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string render_md(const std::vector<std::vector<std::string>>& rows) {
    if (rows.empty()) return "";
    std::string out = "|";
    for (const auto& h : rows.front()) out += " " + md_cell(h) + " |";
    out += "\n|";
    for (size_t i = 0; i < rows.front().size(); ++i) out += " --- |";
    out += "\n";
    for (size_t r = 1; r < rows.size(); ++r) {
        out += "|";
        for (const auto& v : rows[r]) out += " " + md_cell(v) + " |";
        out += "\n";
    }
    return out;
}

std::vector<std::vector<std::string>> strategy_rows(const Tables& tables) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"strategy", "n", "compiled", "new_failed", "new_errored"});
    for (const auto& [name, row] : tables.by_strategy)
        rows.push_back({name, fmt::format("{}", row.n), cell(row.compiled),
                        cell(row.new_failed), cell(row.new_errored)});
    return rows;
}

std::vector<std::vector<std::string>> type_rows(const Tables& tables) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"refactoring_type", "n", "loc", "cyclomatic", "fan_out", "codebleu",
                    "compiled", "new_failed", "new_errored"});
    for (const auto& [name, row] : tables.by_type) {
        if (row.n == 0) continue;
        rows.push_back({name, fmt::format("{}", row.n), cell(row.loc), cell(row.cyclomatic),
                        cell(row.fan_out), cell(row.codebleu), cell(row.compiled),
                        cell(row.new_failed), cell(row.new_errored)});
    }
    return rows;
}

std::vector<std::vector<std::string>> run_rows(const Tables& tables) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"run", "attempts", "lexical", "parsing", "compilation", "other"});
    for (const auto& [run, row] : tables.by_run)
        rows.push_back({fmt::format("{}", run), fmt::format("{}", row.attempts),
                        fmt::format("{}", row.lexical), fmt::format("{}", row.parsing),
                        fmt::format("{}", row.compilation), fmt::format("{}", row.other)});
    return rows;
}

std::vector<std::vector<std::string>> bucket_rows(const Tables& tables) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"bucket", "count"});
    for (const auto& [name, count] : tables.buckets)
        rows.push_back({name, fmt::format("{}", count)});
    return rows;
}

} // namespace

void cmd_report(const std::string& archive_dir) {
    auto records = load_archive(archive_dir);
    auto tables = build_tables(records);

    fs::path report_dir = fs::path(archive_dir) / "report";
    fs::create_directories(report_dir);

    auto strategy_table = strategy_rows(tables);
    auto type_table = type_rows(tables);
    auto run_table = run_rows(tables);
    auto bucket_table = bucket_rows(tables);

    write_file_atomic(report_dir / "by_strategy.csv", render_csv(strategy_table));
    write_file_atomic(report_dir / "by_type.csv", render_csv(type_table));
    write_file_atomic(report_dir / "errors_by_run.csv", render_csv(run_table));
    write_file_atomic(report_dir / "error_buckets.csv", render_csv(bucket_table));

    int attempts = 0, skipped = 0;
    for (const auto& r : records)
        r.status == "skipped" ? ++skipped : ++attempts;
    std::string md = fmt::format("# Batch report\n\n{} item(s): {} attempted, {} skipped.\n",
                                 records.size(), attempts, skipped);
    md += "\n## Outcomes by strategy\n\n" + render_md(strategy_table);
    md += "\n## Outcomes by refactoring type\n\n" + render_md(type_table);
    md += "\n## Failures by run\n\n" + render_md(run_table);
    md += "\n## Compiler error buckets\n\n" + render_md(bucket_table);
    write_file_atomic(report_dir / "report.md", md);
}

} // namespace reflab::runner
