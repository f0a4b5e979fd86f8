#include "reflab/metrics/codebleu.hpp"

#include "reflab/java/lexer.hpp"
#include "reflab/java/tree.hpp"
#include "reflab/metrics/metrics.hpp"
#include "reflab/support/errors.hpp"
#include "reflab/support/strings.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace reflab::metrics {

namespace {

constexpr int kMaxOrder = 4;
constexpr double kKeywordWeight = 1.0;
constexpr double kPlainWeight = 0.2;

std::vector<std::string> lex_tokens(const std::string& text) {
    auto result = java::tokenize(text);
    std::vector<std::string> tokens;
    tokens.reserve(result.tokens.size());
    for (auto& t : result.tokens) tokens.push_back(std::move(t.text));
    // On a lexical fault, score whatever tokenized before it; the parse-based
    // components degrade the same way.
    return tokens;
}

std::string join_ngram(const std::vector<std::string>& tokens, size_t start, int n) {
    std::string key;
    for (int i = 0; i < n; ++i) {
        key += tokens[start + i];
        key += '\x1f';
    }
    return key;
}

double bleu(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
            bool weighted) {
    double log_sum = 0.0;
    int orders = 0;
    for (int n = 1; n <= kMaxOrder; ++n) {
        if (cand.size() < static_cast<size_t>(n)) break;

        std::unordered_map<std::string, int> ref_counts;
        if (ref.size() + 1 >= static_cast<size_t>(n))
            for (size_t i = 0; i + n <= ref.size(); ++i)
                ++ref_counts[join_ngram(ref, i, n)];

        std::unordered_map<std::string, int> cand_counts;
        std::unordered_map<std::string, double> gram_weight;
        double total = 0.0;
        for (size_t i = 0; i + n <= cand.size(); ++i) {
            std::string key = join_ngram(cand, i, n);
            double w = !weighted ? 1.0
                       : java::is_java_keyword(cand[i]) ? kKeywordWeight
                                                        : kPlainWeight;
            ++cand_counts[key];
            gram_weight[key] = w;
            total += w;
        }
        double matched = 0.0;
        for (const auto& [key, count] : cand_counts) {
            auto it = ref_counts.find(key);
            if (it == ref_counts.end()) continue;
            matched += std::min(count, it->second) * gram_weight[key];
        }

        double p = n == 1 ? (total > 0 ? matched / total : 0.0)
                          : (matched + 1.0) / (total + 1.0);
        if (p <= 0.0) return 0.0;
        log_sum += std::log(p);
        ++orders;
    }
    if (orders == 0) return 0.0;

    double bp = 1.0;
    if (cand.size() < ref.size())
        bp = std::exp(1.0 - static_cast<double>(ref.size()) / cand.size());
    return bp * std::exp(log_sum / orders);
}

java::SourceTree parse_lenient(const std::string& fragment) {
    try {
        return parse_fragment_tolerant(fragment);
    } catch (const MetricUnavailableError&) {
        // Error-bearing tree; subtree shapes still compare meaningfully.
        return java::SourceTree::parse(fragment);
    }
}

void collect_subtrees(const java::SourceTree& tree, TSNode node, std::string& sexp,
                      std::vector<std::string>* internal_sexps) {
    uint32_t n = ts_node_named_child_count(node);
    size_t start = sexp.size();
    sexp += '(';
    sexp += ts_node_type(node);
    if (n == 0) {
        sexp += ')';
        return;
    }
    for (uint32_t i = 0; i < n; ++i) {
        sexp += ' ';
        collect_subtrees(tree, ts_node_named_child(node, i), sexp, internal_sexps);
    }
    sexp += ')';
    if (internal_sexps) internal_sexps->push_back(sexp.substr(start));
}

double ast_match(const std::string& cand, const std::string& ref) {
    java::SourceTree cand_tree = parse_lenient(cand);
    java::SourceTree ref_tree = parse_lenient(ref);

    std::vector<std::string> cand_subtrees;
    std::string cand_sexp;
    collect_subtrees(cand_tree, cand_tree.root(), cand_sexp, &cand_subtrees);
    std::unordered_set<std::string> cand_set(cand_subtrees.begin(), cand_subtrees.end());

    std::vector<std::string> ref_subtrees;
    std::string ref_sexp;
    collect_subtrees(ref_tree, ref_tree.root(), ref_sexp, &ref_subtrees);

    if (ref_subtrees.empty()) return 1.0;
    size_t matched = 0;
    for (const std::string& s : ref_subtrees)
        if (cand_set.count(s)) ++matched;
    return static_cast<double>(matched) / ref_subtrees.size();
}

struct VarOccurrence {
    std::string name;
    size_t offset;
    bool is_def;
};

bool identifier_is_variable(TSNode node) {
    TSNode parent = ts_node_parent(node);
    if (ts_node_is_null(parent)) return false;
    const char* p = ts_node_type(parent);

    if (std::strcmp(p, "method_invocation") == 0) {
        TSNode name = ts_node_child_by_field_name(parent, "name", 4);
        if (!ts_node_is_null(name) && ts_node_eq(name, node)) return false;
    }
    if (std::strcmp(p, "field_access") == 0) {
        TSNode field = ts_node_child_by_field_name(parent, "field", 5);
        if (!ts_node_is_null(field) && ts_node_eq(field, node)) return false;
    }
    if (std::strcmp(p, "method_reference") == 0) return false;
    if (std::strcmp(p, "scoped_identifier") == 0) return false;
    if (std::strcmp(p, "labeled_statement") == 0 || std::strcmp(p, "break_statement") == 0 ||
        std::strcmp(p, "continue_statement") == 0)
        return false;
    if (std::strcmp(p, "method_declaration") == 0 ||
        std::strcmp(p, "constructor_declaration") == 0 ||
        std::strcmp(p, "class_declaration") == 0 || std::strcmp(p, "annotation") == 0 ||
        std::strcmp(p, "marker_annotation") == 0)
        return false;
    return true;
}

// Def-use edges with variables renamed by first-occurrence order, so a
// consistent rename leaves the edge set unchanged.
std::set<std::string> dataflow_edges(const std::string& fragment) {
    java::SourceTree tree = parse_lenient(fragment);
    std::vector<VarOccurrence> occurrences;

    tree.visit([&](TSNode node) {
        const char* type = ts_node_type(node);
        if (std::strcmp(type, "variable_declarator") == 0 ||
            std::strcmp(type, "formal_parameter") == 0 ||
            std::strcmp(type, "catch_formal_parameter") == 0 ||
            std::strcmp(type, "enhanced_for_statement") == 0) {
            TSNode name = ts_node_child_by_field_name(node, "name", 4);
            if (!ts_node_is_null(name) &&
                std::strcmp(ts_node_type(name), "identifier") == 0)
                occurrences.push_back(
                    {std::string(tree.text(name)), tree.start_byte(name), true});
        } else if (std::strcmp(type, "assignment_expression") == 0) {
            TSNode left = ts_node_child_by_field_name(node, "left", 4);
            if (!ts_node_is_null(left) &&
                std::strcmp(ts_node_type(left), "identifier") == 0)
                occurrences.push_back(
                    {std::string(tree.text(left)), tree.start_byte(left), true});
        } else if (std::strcmp(type, "identifier") == 0) {
            TSNode parent = ts_node_parent(node);
            bool already_def =
                !ts_node_is_null(parent) &&
                ((std::strcmp(ts_node_type(parent), "variable_declarator") == 0 &&
                  ts_node_eq(ts_node_child_by_field_name(parent, "name", 4), node)) ||
                 (std::strcmp(ts_node_type(parent), "assignment_expression") == 0 &&
                  ts_node_eq(ts_node_child_by_field_name(parent, "left", 4), node)) ||
                 (std::strcmp(ts_node_type(parent), "formal_parameter") == 0) ||
                 (std::strcmp(ts_node_type(parent), "catch_formal_parameter") == 0) ||
                 (std::strcmp(ts_node_type(parent), "enhanced_for_statement") == 0 &&
                  ts_node_eq(ts_node_child_by_field_name(parent, "name", 4), node)));
            if (!already_def && identifier_is_variable(node))
                occurrences.push_back(
                    {std::string(tree.text(node)), tree.start_byte(node), false});
        }
        return true;
    });

    std::sort(occurrences.begin(), occurrences.end(),
              [](const VarOccurrence& a, const VarOccurrence& b) {
                  return a.offset < b.offset;
              });

    std::unordered_map<std::string, int> first_seen;
    std::unordered_map<std::string, int> def_count;
    std::unordered_map<std::string, int> use_count;
    std::set<std::string> edges;
    for (const auto& occ : occurrences) {
        auto [it, inserted] = first_seen.try_emplace(occ.name,
                                                     static_cast<int>(first_seen.size()));
        int var_id = it->second;
        if (occ.is_def) {
            ++def_count[occ.name];
        } else {
            int use_idx = use_count[occ.name]++;
            int last_def = def_count[occ.name] - 1; // -1 = defined outside fragment
            edges.insert("v" + std::to_string(var_id) + ":d" + std::to_string(last_def) +
                         ":u" + std::to_string(use_idx));
        }
    }
    return edges;
}

double dataflow_match(const std::string& cand, const std::string& ref) {
    std::set<std::string> ref_edges = dataflow_edges(ref);
    if (ref_edges.empty()) return 1.0;
    std::set<std::string> cand_edges = dataflow_edges(cand);
    size_t matched = 0;
    for (const auto& edge : ref_edges)
        if (cand_edges.count(edge)) ++matched;
    return static_cast<double>(matched) / ref_edges.size();
}

} // namespace

CodeBleuResult codebleu(const std::string& candidate, const std::string& reference) {
    if (strings::trim(candidate).empty() || strings::trim(reference).empty())
        throw UndefinedMetricError("codebleu requires nonempty candidate and reference");

    std::vector<std::string> cand_tokens = lex_tokens(candidate);
    std::vector<std::string> ref_tokens = lex_tokens(reference);
    if (cand_tokens.empty() || ref_tokens.empty())
        throw UndefinedMetricError("codebleu requires tokenizable candidate and reference");

    CodeBleuResult result;
    result.ngram = bleu(cand_tokens, ref_tokens, false);
    result.weighted_ngram = bleu(cand_tokens, ref_tokens, true);
    result.ast_match = ast_match(candidate, reference);
    result.dataflow_match = dataflow_match(candidate, reference);
    result.combined = 0.25 * (result.ngram + result.weighted_ngram + result.ast_match +
                              result.dataflow_match);
    return result;
}

} // namespace reflab::metrics
