#include "reflab/verify/verify.hpp"

#include "reflab/support/errors.hpp"
#include "reflab/support/fsutil.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace reflab::verify {

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

std::string collapse_spaces(const std::string& text) {
    std::string out;
    bool in_space = false;
    for (char c : text) {
        if (isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out += ' ';
        in_space = false;
        out += c;
    }
    return out;
}

std::string sanitize_ref_component(const std::string& raw) {
    std::string out;
    for (char c : raw) {
        bool ok = isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
                  c == '.';
        out += ok ? c : '-';
    }
    while (out.find("..") != std::string::npos)
        out.replace(out.find(".."), 2, "-");
    if (out.empty()) out = "x";
    if (out.front() == '.') out.front() = '-';
    if (out.back() == '.') out.back() = '-';
    return out;
}

struct BaselineStatus {
    bool compiled = false;
    std::string detail;
};

std::mutex g_baseline_mutex;
std::map<std::string, BaselineStatus> g_baseline_cache;

} // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

std::map<std::string, RepoConfig> load_repo_configs(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw SchemaError(fmt::format("repo config {}: {}", path, e.what()));
    }
    if (!doc.is_object())
        throw SchemaError(fmt::format("repo config {}: top level must be an object", path));

    std::map<std::string, RepoConfig> out;
    for (const auto& [key, value] : doc.items()) {
        if (!value.is_object())
            throw SchemaError(fmt::format("repo config entry {} must be an object", key));
        RepoConfig config;
        for (const char* field : {"repository", "build_cmd", "test_cmd"})
            if (!value.contains(field) || !value[field].is_string())
                throw SchemaError(
                    fmt::format("repo config entry {} is missing string field {}", key,
                                field));
        config.repository = value["repository"].get<std::string>();
        config.build_cmd = value["build_cmd"].get<std::string>();
        config.test_cmd = value["test_cmd"].get<std::string>();
        if (value.contains("adapter")) config.adapter = value["adapter"].get<std::string>();
        if (value.contains("report_dir"))
            config.report_dir = value["report_dir"].get<std::string>();
        if (value.contains("timeout_seconds"))
            config.timeout_seconds = value["timeout_seconds"].get<double>();
        if (value.contains("branch_prefix"))
            config.branch_prefix = value["branch_prefix"].get<std::string>();
        if (config.adapter != "lines" && config.adapter != "junit-xml-dir")
            throw ConfigurationError(
                fmt::format("repo config entry {}: unknown adapter '{}'", key,
                            config.adapter));
        if (config.adapter == "junit-xml-dir" && config.report_dir.empty())
            throw ConfigurationError(fmt::format(
                "repo config entry {}: junit-xml-dir adapter needs report_dir", key));
        out.emplace(key, std::move(config));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Workspace
// ---------------------------------------------------------------------------

std::string Workspace::git(const std::vector<std::string>& args) {
    std::string command = "git -C " + shell_quote(clone_path_);
    for (const auto& arg : args) command += " " + shell_quote(arg);
    CommandResult result = run_command(command, ".", 120.0);
    if (result.start_failed || result.exit_code == 126 || result.exit_code == 127)
        throw EnvironmentError("git is not runnable: " + result.output);
    if (result.exit_code != 0)
        throw WorkspaceError(fmt::format("git {} failed in {}: {}",
                                         args.empty() ? "" : args.front(), clone_path_,
                                         collapse_spaces(result.output)));
    return result.output;
}

Workspace Workspace::prepare(const RepoConfig& config, const std::string& revision,
                             const std::string& clone_path) {
    if (!fs::exists(fs::path(clone_path) / ".git")) {
        fs::create_directories(fs::path(clone_path).parent_path());
        std::string command = "git clone -q " + shell_quote(config.repository) + " " +
                              shell_quote(clone_path);
        CommandResult result = run_command(command, ".", 300.0);
        if (result.start_failed || result.exit_code == 126 || result.exit_code == 127)
            throw EnvironmentError("git is not runnable: " + result.output);
        if (result.exit_code != 0)
            throw WorkspaceError(fmt::format("clone of {} failed: {}", config.repository,
                                             collapse_spaces(result.output)));
    }

    Workspace workspace(clone_path, revision, config.branch_prefix);
    try {
        workspace.git({"checkout", "--force", "-q", revision});
    } catch (const WorkspaceError& e) {
        throw WorkspaceError(fmt::format("cannot check out revision {}: {}", revision,
                                         e.what()));
    }
    workspace.git({"clean", "-fdq"});

    std::string cache_key = clone_path + "@" + revision;
    {
        std::lock_guard<std::mutex> lock(g_baseline_mutex);
        auto cached = g_baseline_cache.find(cache_key);
        if (cached != g_baseline_cache.end()) {
            if (!cached->second.compiled)
                throw BaselineError(cached->second.detail);
            return workspace;
        }
    }

    CommandResult build = run_command(config.build_cmd, clone_path,
                                      config.timeout_seconds);
    if (build.start_failed || build.exit_code == 126 || build.exit_code == 127)
        throw EnvironmentError("build command is not runnable: " + build.output);
    BaselineStatus status;
    status.compiled = build.exit_code == 0 && !build.timed_out;
    if (!status.compiled)
        status.detail = fmt::format("baseline revision {} does not compile: {}",
                                    revision, collapse_spaces(build.output));
    {
        std::lock_guard<std::mutex> lock(g_baseline_mutex);
        g_baseline_cache[cache_key] = status;
    }
    if (!status.compiled) throw BaselineError(status.detail);
    return workspace;
}

void Workspace::checkout(const std::string& ref) {
    git({"checkout", "--force", "-q", ref});
    git({"clean", "-fdq"});
}

std::string Workspace::tree_hash(const std::string& ref) {
    std::string out = git({"rev-parse", ref + "^{tree}"});
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    return out;
}

std::string Workspace::commit_variant(const std::map<std::string, std::string>& files,
                                      const std::string& scenario,
                                      const std::string& strategy, int run) {
    if (files.empty())
        throw StateError("commit_variant called with zero patched files");
    // tracked modifications mean someone edited sources outside the harness;
    // untracked leftovers (test reports, build junk) are cleaned on checkout
    std::string dirty = git({"status", "--porcelain", "--untracked-files=no"});
    if (!dirty.empty())
        throw StateError("workspace is dirty before variant commit: " +
                         collapse_spaces(dirty));
    checkout(baseline_revision_);

    std::string branch = fmt::format(
        "{}/{}/{}/{}", branch_prefix_, sanitize_ref_component(scenario),
        sanitize_ref_component(strategy), run);
    git({"checkout", "-q", "-B", branch, baseline_revision_});
    for (const auto& [relative, content] : files) {
        fs::path target = fs::path(clone_path_) / relative;
        fs::create_directories(target.parent_path());
        write_file_atomic(target.string(), content);
    }
    git({"add", "-A"});
    git({"-c", "user.name=harness", "-c", "user.email=harness@localhost", "commit",
         "-q", "--allow-empty", "-m",
         fmt::format("apply {} / {} run {}", scenario, strategy, run)});
    return branch;
}

// ---------------------------------------------------------------------------
// Compile
// ---------------------------------------------------------------------------

std::vector<std::string> split_diagnostics(const std::string& output) {
    std::vector<std::string> diagnostics;
    std::string current;
    std::istringstream lines(output);
    std::string line;
    auto flush = [&] {
        if (!current.empty()) diagnostics.push_back(current);
        current.clear();
    };
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool header = false;
        if (!line.empty() && !isspace(static_cast<unsigned char>(line.front())))
            header = line.find(": error: ") != std::string::npos ||
                     line.find(": warning: ") != std::string::npos;
        if (header) {
            flush();
            current = line;
            continue;
        }
        // summary lines like "3 errors" end the diagnostic stream
        std::string collapsed = collapse_spaces(line);
        bool summary = false;
        if (!collapsed.empty() && isdigit(static_cast<unsigned char>(collapsed[0]))) {
            size_t space = collapsed.find(' ');
            if (space != std::string::npos) {
                std::string word = collapsed.substr(space + 1);
                summary = word == "error" || word == "errors" || word == "warning" ||
                          word == "warnings";
            }
        }
        if (summary) {
            flush();
            continue;
        }
        if (!current.empty()) current += "\n" + line;
    }
    flush();
    return diagnostics;
}

CompileResult compile(Workspace& workspace, const std::string& branch,
                      const RepoConfig& config) {
    workspace.checkout(branch);
    CommandResult result = run_command(config.build_cmd, workspace.root(),
                                       config.timeout_seconds);
    if (result.start_failed || result.exit_code == 126 || result.exit_code == 127)
        throw EnvironmentError("build command is not runnable: " + result.output);

    CompileResult out;
    out.success = result.exit_code == 0 && !result.timed_out;
    if (!out.success) {
        out.diagnostics = split_diagnostics(result.output);
        if (out.diagnostics.empty()) {
            std::string detail = collapse_spaces(result.output);
            if (result.timed_out) detail = "build timed out: " + detail;
            out.diagnostics.push_back(detail.empty() ? "(no compiler output)" : detail);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Test reports
// ---------------------------------------------------------------------------

TestReport parse_lines_report(const std::string& output) {
    TestReport report;
    bool summary_seen = false;
    std::istringstream lines(output);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("TEST ", 0) == 0) {
            std::istringstream fields(line);
            std::string keyword, id, status;
            fields >> keyword >> id >> status;
            if (status == "FAIL")
                report.failed.insert(id);
            else if (status == "ERROR")
                report.errored.insert(id);
        } else if (line.rfind("SUMMARY ", 0) == 0) {
            summary_seen = true;
            size_t at = line.find("total=");
            if (at != std::string::npos)
                report.executed = std::atoi(line.c_str() + at + 6);
        }
    }
    if (!summary_seen)
        throw HarnessError("test output has no SUMMARY line: " +
                           collapse_spaces(output.substr(0, 400)));
    return report;
}

namespace {

std::string xml_attribute(const std::string& tag, const std::string& name) {
    std::string needle = name + "=\"";
    size_t at = 0;
    while (true) {
        at = tag.find(needle, at);
        if (at == std::string::npos) return "";
        // word boundary: "name=" must not be the tail of "classname="
        if (at > 0 && isspace(static_cast<unsigned char>(tag[at - 1]))) break;
        at += 1;
    }
    size_t begin = at + needle.size();
    size_t end = tag.find('"', begin);
    if (end == std::string::npos) return "";
    return tag.substr(begin, end - begin);
}

} // namespace

TestReport parse_junit_xml(const std::string& xml) {
    TestReport report;
    size_t cursor = 0;
    while (true) {
        size_t open = xml.find("<testcase", cursor);
        if (open == std::string::npos) break;
        size_t close = xml.find('>', open);
        if (close == std::string::npos) break;
        std::string tag = xml.substr(open, close - open + 1);
        std::string classname = xml_attribute(tag, "classname");
        std::string name = xml_attribute(tag, "name");
        std::string id = classname.empty() ? name : classname + "." + name;
        report.executed += 1;

        bool self_closing = close >= 1 && xml[close - 1] == '/';
        if (!self_closing) {
            size_t end = xml.find("</testcase>", close);
            if (end == std::string::npos) end = xml.size();
            std::string body = xml.substr(close, end - close);
            if (body.find("<failure") != std::string::npos)
                report.failed.insert(id);
            else if (body.find("<error") != std::string::npos)
                report.errored.insert(id);
            cursor = end;
        } else {
            cursor = close;
        }
    }
    return report;
}

namespace {

TestReport read_xml_report_dir(const std::string& dir) {
    TestReport merged;
    std::vector<fs::path> files;
    if (fs::exists(dir))
        for (const auto& entry : fs::recursive_directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".xml")
                files.push_back(entry.path());
    if (files.empty())
        throw HarnessError("no XML test reports found under " + dir);
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        TestReport one = parse_junit_xml(read_file(file.string()));
        merged.executed += one.executed;
        merged.failed.insert(one.failed.begin(), one.failed.end());
        merged.errored.insert(one.errored.begin(), one.errored.end());
    }
    return merged;
}

} // namespace

std::vector<TestReport> run_tests(Workspace& workspace, const std::string& branch,
                                  const RepoConfig& config, int repetitions) {
    if (repetitions < 1) throw StateError("repetitions must be at least 1");
    workspace.checkout(branch);
    std::vector<TestReport> reports;
    std::string report_dir =
        (fs::path(workspace.root()) / config.report_dir).string();
    for (int run = 0; run < repetitions; ++run) {
        if (config.adapter == "junit-xml-dir" && fs::exists(report_dir))
            fs::remove_all(report_dir);
        CommandResult result = run_command(config.test_cmd, workspace.root(),
                                           config.timeout_seconds);
        if (result.start_failed || result.exit_code == 126 || result.exit_code == 127)
            throw EnvironmentError("test command is not runnable: " + result.output);
        if (result.timed_out)
            throw HarnessError(fmt::format("test run {} timed out after {}s", run + 1,
                                           config.timeout_seconds));
        if (config.adapter == "lines")
            reports.push_back(parse_lines_report(result.output));
        else
            reports.push_back(read_xml_report_dir(report_dir));
    }
    return reports;
}

// ---------------------------------------------------------------------------
// Outcome diffing
// ---------------------------------------------------------------------------

ValidationOutcome diff_outcomes(const std::vector<TestReport>& baseline_reports,
                                const std::vector<TestReport>& variant_reports) {
    if (baseline_reports.empty() || variant_reports.empty())
        throw StateError("diff_outcomes needs nonempty baseline and variant reports");

    auto union_of = [](const std::vector<TestReport>& reports, bool errored) {
        std::set<std::string> out;
        for (const auto& report : reports) {
            const auto& source = errored ? report.errored : report.failed;
            out.insert(source.begin(), source.end());
        }
        return out;
    };

    std::set<std::string> baseline_failed = union_of(baseline_reports, false);
    std::set<std::string> baseline_errored = union_of(baseline_reports, true);
    std::set<std::string> variant_failed = union_of(variant_reports, false);
    std::set<std::string> variant_errored = union_of(variant_reports, true);

    ValidationOutcome outcome;
    outcome.compiled = true;
    outcome.runs = static_cast<int>(variant_reports.size());
    for (const auto& id : variant_failed)
        if (!baseline_failed.count(id)) outcome.new_failed += 1;
    for (const auto& id : variant_errored)
        if (!baseline_errored.count(id)) outcome.new_errored += 1;

    // unstable: some test's status differs across variant runs
    std::set<std::string> ever_bad;
    ever_bad.insert(variant_failed.begin(), variant_failed.end());
    ever_bad.insert(variant_errored.begin(), variant_errored.end());
    for (const auto& id : ever_bad) {
        int as_failed = 0, as_errored = 0;
        for (const auto& report : variant_reports) {
            if (report.failed.count(id)) ++as_failed;
            if (report.errored.count(id)) ++as_errored;
        }
        int total = static_cast<int>(variant_reports.size());
        if (as_failed != total && as_errored != total) {
            outcome.unstable = true;
            break;
        }
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// Compiler-error buckets
// ---------------------------------------------------------------------------

const std::vector<std::string>& bucket_names() {
    static const std::vector<std::string> names = {
        "cannot find symbol: variable",
        "cannot find symbol: method",
        "is already defined in class",
        "incompatible types",
        "cannot be referenced from a static context",
        "illegal parenthesized expression",
        "cannot assign a value to final variable",
        "cannot be accessed from outside package",
        "illegal static declaration in inner class",
        "method does not override or implement",
        "diamond operator not supported",
        "cannot be applied to given types",
        "missing return statement",
        "modifier static not allowed here",
    };
    return names;
}

std::map<std::string, int> bucket_compiler_errors(
    const std::vector<std::string>& diagnostics) {
    std::map<std::string, int> buckets;
    for (const auto& diagnostic : diagnostics) {
        std::string text = collapse_spaces(diagnostic);
        std::string bucket = "other";
        if (text.find("cannot find symbol") != std::string::npos) {
            if (text.find("symbol: variable") != std::string::npos)
                bucket = "cannot find symbol: variable";
            else if (text.find("symbol: method") != std::string::npos)
                bucket = "cannot find symbol: method";
        } else if (text.find("cannot be applied to given types") != std::string::npos) {
            bucket = "cannot be applied to given types";
        } else if (text.find("is already defined in class") != std::string::npos) {
            bucket = "is already defined in class";
        } else if (text.find("incompatible types") != std::string::npos) {
            bucket = "incompatible types";
        } else if (text.find("cannot be referenced from a static context") !=
                   std::string::npos) {
            bucket = "cannot be referenced from a static context";
        } else if (text.find("illegal parenthesized expression") != std::string::npos) {
            bucket = "illegal parenthesized expression";
        } else if (text.find("cannot assign a value to final variable") !=
                   std::string::npos) {
            bucket = "cannot assign a value to final variable";
        } else if (text.find("cannot be accessed from outside package") !=
                   std::string::npos) {
            bucket = "cannot be accessed from outside package";
        } else if (text.find("illegal static declaration in inner class") !=
                   std::string::npos) {
            bucket = "illegal static declaration in inner class";
        } else if (text.find("method does not override or implement") !=
                   std::string::npos) {
            bucket = "method does not override or implement";
        } else if (text.find("diamond operator") != std::string::npos) {
            bucket = "diamond operator not supported";
        } else if (text.find("missing return statement") != std::string::npos) {
            bucket = "missing return statement";
        } else if (text.find("modifier static not allowed here") != std::string::npos) {
            bucket = "modifier static not allowed here";
        }
        buckets[bucket] += 1;
    }
    return buckets;
}

} // namespace reflab::verify
