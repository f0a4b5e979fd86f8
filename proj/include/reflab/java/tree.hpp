#pragma once

#include <tree_sitter/api.h>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reflab::java {

enum class ParseStage { ok, lexical, parsing };

// Owns both the source text and its concrete syntax tree; node handles stay
// valid for the lifetime of this object.
class SourceTree {
public:
    SourceTree(SourceTree&&) noexcept = default;
    SourceTree& operator=(SourceTree&&) noexcept = default;
    SourceTree(const SourceTree&) = delete;
    SourceTree& operator=(const SourceTree&) = delete;

    // Grammar-level parse; does not run the tokenizer pre-pass.
    static SourceTree parse(std::string source);

    const std::string& source() const { return *source_; }
    TSNode root() const;

    bool has_syntax_error() const;
    std::string_view text(TSNode node) const;
    size_t start_byte(TSNode node) const { return ts_node_start_byte(node); }
    size_t end_byte(TSNode node) const { return ts_node_end_byte(node); }

    // Pre-order walk over named nodes; return false from the visitor to skip
    // the node's subtree.
    void visit(const std::function<bool(TSNode)>& visitor) const;

    std::vector<TSNode> find_all(std::string_view node_type) const;

private:
    SourceTree(std::unique_ptr<std::string> source, TSTree* tree)
        : source_(std::move(source)), tree_(tree, ts_tree_delete) {}

    std::unique_ptr<std::string> source_;
    std::unique_ptr<TSTree, void (*)(TSTree*)> tree_;
};

struct ParseOutcome {
    ParseStage stage = ParseStage::ok;
    std::optional<SourceTree> tree; // present iff stage == ok
    std::string message;            // diagnostic for failed stages

    bool ok() const { return stage == ParseStage::ok; }
};

// Two-phase classification: the tokenizer runs first, so invalid token
// sequences report `lexical`; token-valid sources that violate the grammar
// report `parsing`.
ParseOutcome parse_source(std::string source);

const char* stage_name(ParseStage stage);

} // namespace reflab::java
