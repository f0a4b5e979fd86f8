#include "reflab/java/tree.hpp"

#include "reflab/java/lexer.hpp"

#include <cstring>

extern "C" const TSLanguage* tree_sitter_java();

namespace reflab::java {

SourceTree SourceTree::parse(std::string source) {
    TSParser* parser = ts_parser_new();
    ts_parser_set_language(parser, tree_sitter_java());
    auto owned = std::make_unique<std::string>(std::move(source));
    TSTree* tree = ts_parser_parse_string(parser, nullptr, owned->data(),
                                          static_cast<uint32_t>(owned->size()));
    ts_parser_delete(parser);
    return SourceTree(std::move(owned), tree);
}

TSNode SourceTree::root() const { return ts_tree_root_node(tree_.get()); }

bool SourceTree::has_syntax_error() const {
    return ts_node_has_error(ts_tree_root_node(tree_.get()));
}

std::string_view SourceTree::text(TSNode node) const {
    size_t start = ts_node_start_byte(node);
    size_t end = ts_node_end_byte(node);
    return std::string_view(*source_).substr(start, end - start);
}

void SourceTree::visit(const std::function<bool(TSNode)>& visitor) const {
    std::vector<TSNode> stack{root()};
    while (!stack.empty()) {
        TSNode node = stack.back();
        stack.pop_back();
        if (!visitor(node)) continue;
        uint32_t count = ts_node_named_child_count(node);
        for (uint32_t i = count; i > 0; --i)
            stack.push_back(ts_node_named_child(node, i - 1));
    }
}

std::vector<TSNode> SourceTree::find_all(std::string_view node_type) const {
    std::vector<TSNode> hits;
    visit([&](TSNode node) {
        if (node_type == ts_node_type(node)) hits.push_back(node);
        return true;
    });
    return hits;
}

namespace {

std::string describe_error_node(const SourceTree& tree) {
    std::string message;
    tree.visit([&](TSNode node) {
        if (!message.empty()) return false;
        if (ts_node_is_missing(node)) {
            TSPoint p = ts_node_start_point(node);
            message = "missing " + std::string(ts_node_type(node)) + " at line " +
                      std::to_string(p.row + 1);
            return false;
        }
        if (std::strcmp(ts_node_type(node), "ERROR") == 0) {
            TSPoint p = ts_node_start_point(node);
            std::string_view snippet = tree.text(node).substr(0, 40);
            message = "unexpected input at line " + std::to_string(p.row + 1) + ": \"" +
                      std::string(snippet) + "\"";
            return false;
        }
        return true;
    });
    return message.empty() ? "syntax error" : message;
}

} // namespace

ParseOutcome parse_source(std::string source) {
    ParseOutcome outcome;
    LexResult lex = tokenize(source);
    if (!lex.ok()) {
        outcome.stage = ParseStage::lexical;
        outcome.message = lex.error->message + " at line " + std::to_string(lex.error->line);
        return outcome;
    }
    SourceTree tree = SourceTree::parse(std::move(source));
    if (tree.has_syntax_error()) {
        outcome.stage = ParseStage::parsing;
        outcome.message = describe_error_node(tree);
        return outcome;
    }
    outcome.stage = ParseStage::ok;
    outcome.tree = std::move(tree);
    return outcome;
}

const char* stage_name(ParseStage stage) {
    switch (stage) {
    case ParseStage::ok: return "ok";
    case ParseStage::lexical: return "lexical";
    case ParseStage::parsing: return "parsing";
    }
    return "unknown";
}

} // namespace reflab::java
