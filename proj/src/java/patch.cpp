#include "reflab/java/patch.hpp"

#include "reflab/java/lexer.hpp"
#include "reflab/support/errors.hpp"
#include "reflab/support/strings.hpp"

#include <cstring>

namespace reflab::java {

namespace {

bool is_method_decl(const char* type) {
    return std::strcmp(type, "method_declaration") == 0 ||
           std::strcmp(type, "constructor_declaration") == 0;
}

bool is_type_decl(const char* type) {
    return std::strcmp(type, "class_declaration") == 0 ||
           std::strcmp(type, "interface_declaration") == 0 ||
           std::strcmp(type, "enum_declaration") == 0 ||
           std::strcmp(type, "record_declaration") == 0;
}

std::string node_name(const SourceTree& tree, TSNode node) {
    TSNode name = ts_node_child_by_field_name(node, "name", 4);
    if (ts_node_is_null(name)) return {};
    return std::string(tree.text(name));
}

int formal_param_count(TSNode decl) {
    TSNode params = ts_node_child_by_field_name(decl, "parameters", 10);
    if (ts_node_is_null(params)) return 0;
    int count = 0;
    uint32_t n = ts_node_named_child_count(params);
    for (uint32_t i = 0; i < n; ++i) {
        const char* type = ts_node_type(ts_node_named_child(params, i));
        if (std::strcmp(type, "formal_parameter") == 0 ||
            std::strcmp(type, "spread_parameter") == 0 ||
            std::strcmp(type, "receiver_parameter") == 0)
            ++count;
    }
    return count;
}

} // namespace

TargetSpec TargetSpec::parse(const std::string& raw) {
    TargetSpec spec;
    std::string s = strings::trim(raw);
    size_t paren = s.find('(');
    if (paren == std::string::npos) {
        spec.name = s;
    } else {
        // Drop a return-type prefix: the name is the last word before '('.
        std::string head = strings::trim(s.substr(0, paren));
        size_t sep = head.find_last_of(" \t>");
        spec.name = sep == std::string::npos ? head : head.substr(sep + 1);

        size_t close = s.rfind(')');
        std::string inside = close == std::string::npos || close <= paren
                                 ? ""
                                 : s.substr(paren + 1, close - paren - 1);
        std::string trimmed = strings::trim(inside);
        if (!trimmed.empty() && trimmed != "...") {
            int commas = 0;
            int depth = 0;
            for (char c : trimmed) {
                if (c == '<' || c == '(') ++depth;
                else if (c == '>' || c == ')') --depth;
                else if (c == ',' && depth == 0) ++commas;
            }
            spec.param_count = commas + 1;
        } else if (trimmed.empty()) {
            spec.param_count = 0;
        }
    }
    return spec;
}

TSNode locate_target(const SourceTree& tree, TargetKind kind, const TargetSpec& spec) {
    std::vector<TSNode> matches;
    tree.visit([&](TSNode node) {
        const char* type = ts_node_type(node);
        bool candidate = kind == TargetKind::method ? is_method_decl(type) : is_type_decl(type);
        if (candidate && node_name(tree, node) == spec.name) {
            if (kind == TargetKind::clazz || !spec.param_count ||
                formal_param_count(node) == *spec.param_count)
                matches.push_back(node);
        }
        return true;
    });

    if (matches.empty())
        throw TargetMissingError("no " +
                                 std::string(kind == TargetKind::method ? "method" : "class") +
                                 " named '" + spec.name + "' found");
    if (matches.size() > 1) {
        std::string listing;
        for (TSNode m : matches) {
            TSPoint p = ts_node_start_point(m);
            if (!listing.empty()) listing += ", ";
            listing += spec.name + "/" + std::to_string(formal_param_count(m)) + " at line " +
                       std::to_string(p.row + 1);
        }
        throw AmbiguityError("ambiguous target '" + spec.name + "': candidates " + listing);
    }
    return matches[0];
}

ParseOutcome parse_fragment(const std::string& fragment, TargetKind kind) {
    // The tokenizer sees the bare fragment so lexical faults point at it, not
    // at wrapper text.
    LexResult lex = tokenize(fragment);
    if (!lex.ok()) {
        ParseOutcome outcome;
        outcome.stage = ParseStage::lexical;
        outcome.message =
            lex.error->message + " at line " + std::to_string(lex.error->line);
        return outcome;
    }
    std::string wrapped = kind == TargetKind::method
                              ? "class __FragmentHolder {\n" + fragment + "\n}\n"
                              : fragment;
    ParseOutcome outcome = parse_source(std::move(wrapped));
    if (outcome.ok() && kind == TargetKind::method) {
        // Reject fragments that parse only because the wrapper absorbed them
        // (e.g. a stray field): require at least one callable declaration.
        bool has_callable = false;
        outcome.tree->visit([&](TSNode node) {
            if (is_method_decl(ts_node_type(node))) {
                has_callable = true;
                return false;
            }
            return true;
        });
        if (!has_callable) {
            ParseOutcome failed;
            failed.stage = ParseStage::parsing;
            failed.message = "fragment is not a method declaration";
            return failed;
        }
    }
    return outcome;
}

PatchResult apply_patch(const SourceTree& tree, const PatchPlan& plan) {
    PatchResult result;

    ParseOutcome frag = parse_fragment(plan.replacement_fragment, plan.target_kind);
    if (!frag.ok()) {
        result.failure_stage = frag.stage;
        result.message = "replacement fragment: " + frag.message;
        return result;
    }
    for (const std::string& aux : plan.auxiliary_fragments) {
        ParseOutcome aux_outcome = parse_fragment(aux, TargetKind::method);
        if (!aux_outcome.ok()) {
            result.failure_stage = aux_outcome.stage;
            result.message = "auxiliary fragment: " + aux_outcome.message;
            return result;
        }
    }

    TSNode target = locate_target(tree, plan.target_kind, TargetSpec::parse(plan.target_name));
    size_t start = tree.start_byte(target);
    size_t end = tree.end_byte(target);

    std::string patched;
    patched.reserve(tree.source().size() + plan.replacement_fragment.size());
    patched.append(tree.source(), 0, start);
    patched.append(plan.replacement_fragment);
    for (const std::string& aux : plan.auxiliary_fragments) {
        patched.append("\n\n");
        patched.append(aux);
    }
    patched.append(tree.source(), end, tree.source().size() - end);

    ParseOutcome reparse = parse_source(patched);
    if (!reparse.ok()) {
        result.failure_stage = reparse.stage;
        result.message = "patched file does not re-parse: " + reparse.message;
        return result;
    }

    result.status = PatchResult::Status::applied;
    result.failure_stage.reset();
    result.patched_text = std::move(patched);
    result.inserted_count = static_cast<int>(plan.auxiliary_fragments.size());
    return result;
}

} // namespace reflab::java
