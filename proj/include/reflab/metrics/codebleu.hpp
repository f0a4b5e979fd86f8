#pragma once

#include <string>

namespace reflab::metrics {

struct CodeBleuResult {
    double ngram = 0.0;
    double weighted_ngram = 0.0;
    double ast_match = 0.0;
    double dataflow_match = 0.0;
    double combined = 0.0; // equal 0.25 weights
};

// Four-component CodeBLEU:
//   ngram          BLEU up to order 4, add-one smoothing on orders >= 2
//   weighted_ngram same, n-grams weighted by their first token (keyword 1.0,
//                  other 0.2)
//   ast_match      share of reference parse-tree internal nodes whose subtree
//                  shape also occurs in the candidate tree
//   dataflow_match share of reference def-use edges present in the candidate,
//                  variables normalized by first-occurrence order
// Empty reference sets score 1.0 (vacuously satisfied), which keeps
// codebleu(x, x) = 1 for every x. Throws UndefinedMetricError when either
// input is empty or has no tokens.
CodeBleuResult codebleu(const std::string& candidate, const std::string& reference);

} // namespace reflab::metrics
