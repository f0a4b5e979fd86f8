#pragma once

#include "reflab/corpus/corpus.hpp"

#include <string>
#include <vector>

namespace reflab::extract {

struct ExtractedCode {
    std::vector<std::string> methods;
    std::vector<std::string> classes;
    std::vector<std::string> others; // residual prose, in order of appearance
};

// Normalizes raw model output: unwraps fenced code blocks, classifies
// top-level brace-balanced declarations into classes and methods, and routes
// residual prose to others. Never throws; unclassifiable content lands in
// others and empty input yields three empty lists.
ExtractedCode extract(const std::string& raw_text);

struct PrimaryFragment {
    std::string text;
    std::vector<std::string> warnings; // e.g. name-mismatch fallback
};

// The fragment whose declared name matches target_name, else the first of the
// requested kind with a warning. Throws MissingFragmentError when the kind is
// absent entirely.
PrimaryFragment primary_fragment(const ExtractedCode& extracted,
                                 corpus::TargetKind target_kind,
                                 const std::string& target_name);

// Declared name of a method or class fragment; empty when unrecognizable.
std::string fragment_name(const std::string& fragment, corpus::TargetKind kind);

// Re-joins a partition into one text (fragments then prose, blank-line
// separated); extract(join(extract(x))) == extract(x).
std::string join(const ExtractedCode& extracted);

} // namespace reflab::extract
