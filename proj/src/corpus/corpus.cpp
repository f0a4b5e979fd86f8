#include "reflab/corpus/corpus.hpp"

#include "reflab/support/errors.hpp"
#include "reflab/support/fsutil.hpp"
#include "reflab/support/strings.hpp"

#include <json.hpp>

#include <algorithm>

namespace reflab::corpus {

using nlohmann::json;

namespace {

constexpr int kFullCatalogSize = 61;

// First matching key wins; the canonical name leads, Listing aliases follow.
std::optional<std::string> pick_string(const json& record,
                                       std::initializer_list<const char*> keys,
                                       const std::string& id) {
    for (const char* key : keys) {
        auto it = record.find(key);
        if (it == record.end() || it->is_null()) continue;
        if (!it->is_string())
            throw SchemaError("scenario '" + id + "': key '" + key + "' must be a string");
        return it->get<std::string>();
    }
    return std::nullopt;
}

RefactoringScenario parse_scenario(const std::string& id, const json& record) {
    if (!record.is_object())
        throw SchemaError("scenario '" + id + "' is not an object");

    RefactoringScenario s;
    s.id = id;

    auto type = pick_string(record, {"refactoring_type", "RefactMethod"}, id);
    if (!type || strings::trim(*type).empty())
        throw SchemaError("scenario '" + id + "': missing key 'refactoring_type'");
    s.refactoring_type = strings::trim(*type);

    auto before = pick_string(record, {"before_code", "BeforeCode"}, id);
    if (!before)
        throw SchemaError("scenario '" + id + "': missing key 'before_code'");
    s.before_code = *before;

    s.ground_truth_after = pick_string(record, {"ground_truth_after", "AfterCode"}, id);
    s.commit_before = pick_string(record, {"commit_before", "commitID_before"}, id);
    s.path_before = pick_string(record, {"path_before"}, id);
    s.target_name = pick_string(record, {"target_name", "name"}, id);
    s.repository = pick_string(record, {"repository", "Repository"}, id);

    auto kind = pick_string(record, {"target_kind"}, id);
    if (kind) {
        std::string k = strings::normalize_type_name(*kind);
        if (k == "METHOD")
            s.target_kind = TargetKind::method;
        else if (k == "CLASS")
            s.target_kind = TargetKind::clazz;
        else
            throw SchemaError("scenario '" + id + "': key 'target_kind' must be method or class");
    }

    auto dataset = pick_string(record, {"dataset"}, id);
    if (dataset) {
        std::string d = strings::normalize_type_name(*dataset);
        if (d == "BENCHMARK")
            s.dataset = Dataset::benchmark;
        else if (d == "REAL")
            s.dataset = Dataset::real;
        else
            throw SchemaError("scenario '" + id + "': key 'dataset' must be benchmark or real");
    } else {
        s.dataset = s.commit_before ? Dataset::real : Dataset::benchmark;
    }

    if (s.dataset == Dataset::real) {
        const char* missing = !s.commit_before ? "commit_before"
                              : !s.path_before ? "path_before"
                              : !s.repository  ? "repository"
                              : !s.target_name ? "target_name"
                                               : nullptr;
        if (missing)
            throw SchemaError("scenario '" + id + "': real dataset requires key '" +
                              missing + "'");
    } else if (!s.ground_truth_after) {
        throw SchemaError("scenario '" + id +
                          "': benchmark dataset requires key 'ground_truth_after'");
    }
    return s;
}

} // namespace

std::vector<RefactoringScenario> load_scenarios(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw SchemaError("scenario file " + path.string() + ": " + e.what());
    }
    if (!doc.is_object())
        throw SchemaError("scenario file " + path.string() + ": top level must be a map id -> record");

    std::vector<RefactoringScenario> scenarios;
    for (const auto& [id, record] : doc.items()) {
        auto duplicate = std::find_if(scenarios.begin(), scenarios.end(),
                                      [&](const auto& s) { return s.id == id; });
        if (duplicate != scenarios.end())
            throw DuplicationError("duplicate scenario id '" + id + "'");
        scenarios.push_back(parse_scenario(id, record));
    }
    std::sort(scenarios.begin(), scenarios.end(),
              [](const auto& x, const auto& y) { return x.id < y.id; });
    return scenarios;
}

void validate_against_catalog(const std::vector<RefactoringScenario>& scenarios,
                              const Catalog& catalog) {
    for (const auto& s : scenarios)
        catalog.lookup(s.refactoring_type); // throws UnknownTypeError
}

Catalog load_catalog(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw SchemaError("catalog file " + path.string() + ": " + e.what());
    }
    if (!doc.is_object())
        throw SchemaError("catalog file " + path.string() + ": top level must be a map name -> entry");

    Catalog catalog;
    for (const auto& [name, record] : doc.items()) {
        if (!record.is_object())
            throw SchemaError("catalog entry '" + name + "' is not an object");
        CatalogEntry entry;
        entry.name = name;

        const json* mechanics = nullptr;
        for (const char* key : {"mechanics", "Mechanics"}) {
            auto it = record.find(key);
            if (it != record.end()) mechanics = &*it;
        }
        if (!mechanics)
            throw SchemaError("catalog entry '" + name + "': missing key 'mechanics'");
        if (mechanics->is_array()) {
            for (const auto& step : *mechanics)
                entry.mechanics_steps.push_back(step.get<std::string>());
        } else if (mechanics->is_string()) {
            for (const auto& line : strings::split_lines(mechanics->get<std::string>())) {
                std::string step = strings::trim(line);
                if (!step.empty()) entry.mechanics_steps.push_back(step);
            }
        } else {
            throw SchemaError("catalog entry '" + name + "': key 'mechanics' must be a list or text");
        }
        if (entry.mechanics_steps.empty())
            throw SchemaError("catalog entry '" + name + "': key 'mechanics' is empty");

        for (const char* key : {"examples", "Examples", "Example"}) {
            auto it = record.find(key);
            if (it == record.end()) continue;
            if (!it->is_array())
                throw SchemaError("catalog entry '" + name + "': key '" + key +
                                  "' must be a list");
            for (const auto& example : *it) {
                CatalogExample ex;
                if (example.is_object()) {
                    if (example.contains("before")) ex.before_text = example["before"];
                    if (example.contains("after")) ex.after_text = example["after"];
                    if (example.contains("text")) ex.after_text = example["text"];
                } else if (example.is_string()) {
                    ex.after_text = example.get<std::string>();
                }
                entry.examples.push_back(std::move(ex));
            }
        }

        auto snippet = record.find("illustrative_snippet");
        if (snippet != record.end() && snippet->is_string())
            entry.illustrative_snippet = snippet->get<std::string>();

        for (const char* key : {"rule", "Rule", "rule_text"}) {
            auto it = record.find(key);
            if (it != record.end() && it->is_string() &&
                !strings::trim(it->get<std::string>()).empty())
                entry.rule_text = it->get<std::string>();
        }
        if (entry.rule_text) ++catalog.rule_supported_count;

        std::string key = strings::normalize_type_name(name);
        if (catalog.entries.count(key))
            throw DuplicationError("catalog entry '" + name + "' collides with an existing name");
        catalog.entries.emplace(key, std::move(entry));
    }

    if (static_cast<int>(catalog.entries.size()) < kFullCatalogSize)
        catalog.warnings.push_back("catalog holds " + std::to_string(catalog.entries.size()) +
                                   " of " + std::to_string(kFullCatalogSize) + " expected types");
    return catalog;
}

const CatalogEntry& Catalog::lookup(const std::string& refactoring_type) const {
    auto it = entries.find(strings::normalize_type_name(refactoring_type));
    if (it == entries.end()) {
        std::string valid;
        for (const auto& [key, entry] : entries) {
            if (!valid.empty()) valid += ", ";
            valid += entry.name;
        }
        throw UnknownTypeError("unknown refactoring type '" + refactoring_type +
                               "'; valid names: " + valid);
    }
    return it->second;
}

bool Catalog::has(const std::string& refactoring_type) const {
    return entries.count(strings::normalize_type_name(refactoring_type)) > 0;
}

std::string to_json(const std::vector<RefactoringScenario>& scenarios) {
    json doc = json::object();
    for (const auto& s : scenarios) {
        json record;
        record["refactoring_type"] = s.refactoring_type;
        record["dataset"] = dataset_name(s.dataset);
        record["before_code"] = s.before_code;
        record["target_kind"] = target_kind_name(s.target_kind);
        if (s.ground_truth_after) record["ground_truth_after"] = *s.ground_truth_after;
        if (s.commit_before) record["commit_before"] = *s.commit_before;
        if (s.path_before) record["path_before"] = *s.path_before;
        if (s.target_name) record["target_name"] = *s.target_name;
        if (s.repository) record["repository"] = *s.repository;
        doc[s.id] = std::move(record);
    }
    return doc.dump(2);
}

const char* dataset_name(Dataset dataset) {
    return dataset == Dataset::benchmark ? "benchmark" : "real";
}

const char* target_kind_name(TargetKind kind) {
    return kind == TargetKind::method ? "method" : "class";
}

} // namespace reflab::corpus
