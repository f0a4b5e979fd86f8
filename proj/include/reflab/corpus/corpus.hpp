#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace reflab::corpus {

enum class Dataset { benchmark, real };
enum class TargetKind { method, clazz };

struct RefactoringScenario {
    std::string id;
    std::string refactoring_type;
    Dataset dataset = Dataset::benchmark;
    std::string before_code;
    std::optional<std::string> ground_truth_after;
    std::optional<std::string> commit_before;
    std::optional<std::string> path_before;
    std::optional<std::string> target_name;
    TargetKind target_kind = TargetKind::method;
    std::optional<std::string> repository;
};

struct CatalogExample {
    std::string before_text;
    std::string after_text; // narrative text when the catalog gives no code pair
};

struct CatalogEntry {
    std::string name;
    std::vector<std::string> mechanics_steps;
    std::vector<CatalogExample> examples;
    std::optional<std::string> illustrative_snippet; // two-shot fallback material
    std::optional<std::string> rule_text;
};

struct Catalog {
    // keyed by normalized name; entry.name keeps the canonical capitalization
    std::map<std::string, CatalogEntry> entries;
    int rule_supported_count = 0;
    std::vector<std::string> warnings;

    // Case/underscore-insensitive. Throws UnknownTypeError listing valid names.
    const CatalogEntry& lookup(const std::string& refactoring_type) const;
    bool has(const std::string& refactoring_type) const;
};

// JSON map id -> record, Listing-1 field names accepted as aliases
// (RefactMethod, BeforeCode, AfterCode, commitID_before, path_before, name).
// Returned sorted by id. Throws SchemaError / DuplicationError.
std::vector<RefactoringScenario> load_scenarios(const std::filesystem::path& path);

// Checks every scenario's refactoring_type against the catalog; throws
// UnknownTypeError naming the offender and the valid names.
void validate_against_catalog(const std::vector<RefactoringScenario>& scenarios,
                              const Catalog& catalog);

// JSON map name -> {Mechanics|mechanics, Example|examples, Rule|rule, snippet}.
// 61 entries expected; fewer is a warning, not an error.
Catalog load_catalog(const std::filesystem::path& path);

std::string to_json(const std::vector<RefactoringScenario>& scenarios);

const char* dataset_name(Dataset dataset);
const char* target_kind_name(TargetKind kind);

} // namespace reflab::corpus
