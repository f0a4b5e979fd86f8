#pragma once

#include "reflab/java/tree.hpp"

#include <optional>
#include <string>
#include <vector>

namespace reflab::java {

enum class TargetKind { method, clazz };

// Parsed form of a corpus target string such as "set", "set(int, String)" or
// "List<SrcOp> set(...)": a bare name plus an optional parameter count.
struct TargetSpec {
    std::string name;
    std::optional<int> param_count; // absent when the signature leaves it open

    static TargetSpec parse(const std::string& raw);
};

struct PatchPlan {
    TargetKind target_kind = TargetKind::method;
    std::string target_name; // raw corpus string; parsed via TargetSpec
    std::string replacement_fragment;
    std::vector<std::string> auxiliary_fragments;
};

struct PatchResult {
    enum class Status { applied, failed };
    Status status = Status::failed;
    std::optional<ParseStage> failure_stage; // lexical or parsing
    std::optional<std::string> patched_text;
    int inserted_count = 0;
    std::string message;
};

// The unique declaration node matching the spec. Throws TargetMissingError /
// AmbiguityError (candidates listed in the message).
TSNode locate_target(const SourceTree& tree, TargetKind kind, const TargetSpec& spec);

// Validates the fragments standalone, replaces the target's byte span, inserts
// auxiliary fragments as siblings after it, and re-parses the result. All
// bytes outside the edited spans are preserved exactly.
PatchResult apply_patch(const SourceTree& tree, const PatchPlan& plan);

// Fragment-level validation used by apply_patch and exposed for reports: a
// method fragment must parse inside a wrapper class, a class fragment as a
// compilation unit.
ParseOutcome parse_fragment(const std::string& fragment, TargetKind kind);

} // namespace reflab::java
