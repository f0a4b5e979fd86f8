#include "reflab/metrics/metrics.hpp"

#include "reflab/support/errors.hpp"
#include "reflab/support/strings.hpp"

#include <cctype>
#include <cstring>

namespace reflab::metrics {

namespace {

bool is_callable_decl(const char* type) {
    return std::strcmp(type, "method_declaration") == 0 ||
           std::strcmp(type, "constructor_declaration") == 0;
}

bool is_blank(std::string_view line) {
    for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

int count_decision_points(const java::SourceTree& tree, TSNode scope_root) {
    int points = 0;
    std::vector<TSNode> stack{scope_root};
    while (!stack.empty()) {
        TSNode node = stack.back();
        stack.pop_back();
        const char* type = ts_node_type(node);
        if (!ts_node_eq(node, scope_root) && is_callable_decl(type))
            continue; // nested callables are scored on their own
        if (std::strcmp(type, "if_statement") == 0 ||
            std::strcmp(type, "for_statement") == 0 ||
            std::strcmp(type, "enhanced_for_statement") == 0 ||
            std::strcmp(type, "while_statement") == 0 ||
            std::strcmp(type, "do_statement") == 0 ||
            std::strcmp(type, "catch_clause") == 0 ||
            std::strcmp(type, "ternary_expression") == 0) {
            ++points;
        } else if (std::strcmp(type, "switch_label") == 0) {
            if (strings::starts_with(tree.text(node), "case")) ++points;
        } else if (std::strcmp(type, "binary_expression") == 0) {
            TSNode op = ts_node_child_by_field_name(node, "operator", 8);
            if (!ts_node_is_null(op)) {
                std::string_view text = tree.text(op);
                if (text == "&&" || text == "||") ++points;
            }
        }
        uint32_t count = ts_node_named_child_count(node);
        for (uint32_t i = count; i > 0; --i)
            stack.push_back(ts_node_named_child(node, i - 1));
    }
    return points;
}

std::string callable_name(const java::SourceTree& tree, TSNode node) {
    TSNode name = ts_node_child_by_field_name(node, "name", 4);
    return ts_node_is_null(name) ? "(anonymous)" : std::string(tree.text(name));
}

} // namespace

int loc(std::string_view fragment) {
    if (fragment.empty()) return 0;
    int count = 0;
    for (const std::string& line : strings::split_lines(fragment))
        if (!is_blank(line)) ++count;
    return count;
}

java::SourceTree parse_fragment_tolerant(const std::string& fragment) {
    auto unit = java::parse_source(fragment);
    if (unit.ok()) return std::move(*unit.tree);
    if (unit.stage == java::ParseStage::lexical)
        throw MetricUnavailableError("fragment does not tokenize: " + unit.message);

    auto as_member = java::parse_source("class __W {\n" + fragment + "\n}\n");
    if (as_member.ok()) return std::move(*as_member.tree);

    auto as_body = java::parse_source("class __W { void __w() {\n" + fragment + "\n} }\n");
    if (as_body.ok()) return std::move(*as_body.tree);

    throw MetricUnavailableError("fragment does not parse: " + unit.message);
}

ComplexityReport cyclomatic_complexity(const std::string& fragment) {
    java::SourceTree tree = parse_fragment_tolerant(fragment);
    ComplexityReport report;

    std::vector<TSNode> callables;
    tree.visit([&](TSNode node) {
        if (is_callable_decl(ts_node_type(node))) callables.push_back(node);
        return true;
    });

    for (TSNode node : callables) {
        std::string name = callable_name(tree, node);
        if (name == "__w") name = "(fragment)";
        report.callables.push_back({name, 1 + count_decision_points(tree, node)});
    }
    if (report.callables.empty())
        report.callables.push_back({"(fragment)", 1 + count_decision_points(tree, tree.root())});

    for (const auto& entry : report.callables) report.total += entry.value;
    return report;
}

int fan_out(const std::string& fragment) {
    java::SourceTree tree = parse_fragment_tolerant(fragment);
    int count = 0;
    tree.visit([&](TSNode node) {
        if (std::strcmp(ts_node_type(node), "method_invocation") == 0) ++count;
        return true;
    });
    return count;
}

} // namespace reflab::metrics
