#pragma once

#include "reflab/java/tree.hpp"

#include <string>
#include <vector>

namespace reflab::metrics {

// Lines containing at least one non-whitespace character; invariant under a
// trailing newline.
int loc(std::string_view fragment);

struct CallableComplexity {
    std::string name; // "(fragment)" for bare statement fragments
    int value = 1;
};

struct ComplexityReport {
    std::vector<CallableComplexity> callables;
    int total = 0; // sum over callables
};

// CC per callable: 1 + decision points (if, loop headers, case labels, catch
// clauses, ternary, short-circuit && and ||). Nested callables are scored
// separately; lambdas count toward their enclosing callable.
// Throws MetricUnavailableError when the fragment cannot be parsed.
ComplexityReport cyclomatic_complexity(const std::string& fragment);

// Method-invocation count. Constructor calls (`new`, this(), super()) are
// excluded; qualified calls and chained calls each count once per invocation.
// Throws MetricUnavailableError when the fragment cannot be parsed.
int fan_out(const std::string& fragment);

// Fragments arrive as compilation units, bare declarations, or bare statement
// lists; parses with the matching wrapper. Throws MetricUnavailableError if
// nothing yields a clean tree.
java::SourceTree parse_fragment_tolerant(const std::string& fragment);

} // namespace reflab::metrics
