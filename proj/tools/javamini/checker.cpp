#include "javamini.hpp"

#include "reflab/java/tree.hpp"

#include <fmt/format.h>
#include <tree_sitter/api.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace javamini {

namespace {

using reflab::java::SourceTree;

int node_line(TSNode node) { return static_cast<int>(ts_node_start_point(node).row) + 1; }

bool is_type(TSNode node, const char* name) {
    return !ts_node_is_null(node) && std::string_view(ts_node_type(node)) == name;
}

TSNode child_field(TSNode node, const char* field) {
    return ts_node_child_by_field_name(node, field, static_cast<uint32_t>(strlen(field)));
}

// ---------------------------------------------------------------------------
// Symbol model
// ---------------------------------------------------------------------------

struct ParamSym {
    std::string name;
    std::string type;
};

struct MethodSym {
    std::string name;
    std::vector<ParamSym> params;
    std::string return_type;
    bool is_static = false;
    bool is_private = false;
    bool is_public = false;
    bool is_abstract = false;
    bool has_override = false;
    int line = 0;
    int override_line = 0;
    TSNode body{};
    bool has_body = false;
    bool is_constructor = false;
};

struct FieldSym {
    std::string name;
    std::string type;
    bool is_static = false;
    bool is_final = false;
    bool is_private = false;
    bool is_public = false;
    int line = 0;
};

struct ClassSym {
    std::string name;       // simple name
    std::string display;    // Outer.Inner for nested
    std::string package;
    std::string file;
    std::optional<std::string> superclass;
    std::vector<MethodSym> methods;
    std::vector<FieldSym> fields;
    std::vector<std::string> nested;
    bool is_interface = false;
    bool inner_nonstatic = false; // non-static member class
    int line = 0;
    const SourceTree* tree = nullptr;
};

// java.lang surface the mini-projects may touch; member calls on these are
// accepted, with known signatures supplying return types where it matters.
const std::unordered_set<std::string> kBuiltinClasses = {
    "System",    "Math",          "String",    "Integer",  "Long",
    "Double",    "Boolean",       "Character", "Object",   "Objects",
    "Exception", "RuntimeException", "Error",  "Throwable",
    "IllegalArgumentException", "IllegalStateException", "ArithmeticException",
    "NullPointerException",     "AssertionError",        "StringBuilder",
    "ArrayIndexOutOfBoundsException", "UnsupportedOperationException",
    "NumberFormatException",    "CharSequence", "Comparable", "Runnable"};

const std::unordered_set<std::string> kPrimitiveTypes = {
    "int", "long", "double", "float", "short", "byte", "char", "boolean", "void"};

// Return types for the builtin members the fixtures use; key "Class.member"
// for statics, ".member" for instance methods on String-like values.
const std::unordered_map<std::string, std::string> kBuiltinReturns = {
    {".equals", "boolean"},   {".length", "int"},        {".substring", "String"},
    {".contains", "boolean"}, {".startsWith", "boolean"},{".endsWith", "boolean"},
    {".isEmpty", "boolean"},  {".indexOf", "int"},       {".trim", "String"},
    {".toUpperCase", "String"}, {".toLowerCase", "String"}, {".concat", "String"},
    {".charAt", "char"},      {".hashCode", "int"},      {".toString", "String"},
    {".compareTo", "int"},    {".getMessage", "String"},
    {"String.valueOf", "String"},   {"String.format", "String"},
    {"String.join", "String"},
    {"Integer.parseInt", "int"},    {"Integer.toString", "String"},
    {"Integer.valueOf", "int"},     {"Integer.compare", "int"},
    {"Long.parseLong", "long"},     {"Long.toString", "String"},
    {"Long.compare", "int"},        {"Long.valueOf", "long"},
    {"Double.parseDouble", "double"}, {"Double.toString", "String"},
    {"Double.compare", "int"},      {"Double.isNaN", "boolean"},
    {"Boolean.parseBoolean", "boolean"}, {"Boolean.toString", "String"},
    {"Objects.equals", "boolean"},  {"Objects.hash", "int"},
    {"Objects.toString", "String"}, {"Objects.isNull", "boolean"},
    {"System.lineSeparator", "String"}, {"System.currentTimeMillis", "long"},
    {"System.nanoTime", "long"},
    {"Math.abs", "?"}, {"Math.max", "?"}, {"Math.min", "?"},
    {"Math.floorDiv", "long"}, {"Math.floorMod", "long"},
    {"Math.sqrt", "double"}, {"Math.pow", "double"}, {"Math.round", "long"},
    {"Character.isDigit", "boolean"}, {"Character.isLetter", "boolean"}};

struct VarInfo {
    std::string type;
    bool is_final = false;
};

// ---------------------------------------------------------------------------
// Checker
// ---------------------------------------------------------------------------

class Checker {
public:
    explicit Checker(const std::vector<SourceFile>& files) : files_(files) {}

    CheckResult run() {
        parse_all();
        collect_all();
        for (auto& [name, cls] : classes_) check_class(cls);
        std::sort(result_.diagnostics.begin(), result_.diagnostics.end(),
                  [](const Diagnostic& a, const Diagnostic& b) {
                      if (a.path != b.path) return a.path < b.path;
                      if (a.line != b.line) return a.line < b.line;
                      return a.message < b.message;
                  });
        return std::move(result_);
    }

private:
    const std::vector<SourceFile>& files_;
    std::vector<std::unique_ptr<SourceTree>> trees_;
    std::vector<std::string> tree_paths_;
    std::map<std::string, ClassSym> classes_; // simple name -> symbol
    CheckResult result_;

    // current context while checking
    const ClassSym* current_class_ = nullptr;
    const MethodSym* current_method_ = nullptr;
    std::vector<std::map<std::string, VarInfo>> scopes_;

    void report(const std::string& path, int line, std::string message,
                std::vector<std::string> notes = {}) {
        result_.diagnostics.push_back({path, line, std::move(message), std::move(notes)});
    }

    // ---- pass 1: parse -----------------------------------------------------

    void parse_all() {
        for (const auto& file : files_) {
            auto outcome = reflab::java::parse_source(file.text);
            if (!outcome.ok()) {
                report(file.path, 1, outcome.message.empty() ? "syntax error"
                                                             : outcome.message);
                trees_.push_back(nullptr);
            } else {
                trees_.push_back(
                    std::make_unique<SourceTree>(std::move(*outcome.tree)));
            }
            tree_paths_.push_back(file.path);
        }
    }

    // ---- pass 2: symbol collection ------------------------------------------

    std::string node_text(const SourceTree& tree, TSNode node) {
        return std::string(tree.text(node));
    }

    struct Modifiers {
        bool is_static = false, is_final = false, is_private = false, is_public = false,
             is_abstract = false, has_override = false;
        int override_line = 0;
        int static_line = 0;
    };

    Modifiers read_modifiers(const SourceTree& tree, TSNode owner) {
        Modifiers mods;
        uint32_t n = ts_node_child_count(owner);
        for (uint32_t i = 0; i < n; ++i) {
            TSNode child = ts_node_child(owner, i);
            if (!is_type(child, "modifiers")) continue;
            uint32_t m = ts_node_child_count(child);
            for (uint32_t j = 0; j < m; ++j) {
                TSNode mod = ts_node_child(child, j);
                std::string text = node_text(tree, mod);
                if (text == "static") {
                    mods.is_static = true;
                    mods.static_line = node_line(mod);
                } else if (text == "final") {
                    mods.is_final = true;
                } else if (text == "private") {
                    mods.is_private = true;
                } else if (text == "public") {
                    mods.is_public = true;
                } else if (text == "abstract") {
                    mods.is_abstract = true;
                } else if (text == "@Override") {
                    mods.has_override = true;
                    mods.override_line = node_line(mod);
                }
            }
        }
        return mods;
    }

    std::string type_text(const SourceTree& tree, TSNode type_node) {
        if (ts_node_is_null(type_node)) return "?";
        std::string text = node_text(tree, type_node);
        std::string out;
        for (char c : text)
            if (!isspace(static_cast<unsigned char>(c))) out += c;
        return out;
    }

    void collect_all() {
        for (size_t i = 0; i < trees_.size(); ++i) {
            if (!trees_[i]) continue;
            TSNode root = trees_[i]->root();
            std::string package = find_package(*trees_[i], root);
            uint32_t n = ts_node_named_child_count(root);
            for (uint32_t j = 0; j < n; ++j) {
                TSNode child = ts_node_named_child(root, j);
                if (is_type(child, "class_declaration") ||
                    is_type(child, "interface_declaration") ||
                    is_type(child, "enum_declaration"))
                    collect_class(*trees_[i], tree_paths_[i], package, child, "", false);
            }
        }
    }

    std::string find_package(const SourceTree& tree, TSNode root) {
        uint32_t n = ts_node_named_child_count(root);
        for (uint32_t i = 0; i < n; ++i) {
            TSNode child = ts_node_named_child(root, i);
            if (is_type(child, "package_declaration")) {
                uint32_t m = ts_node_named_child_count(child);
                for (uint32_t j = 0; j < m; ++j) {
                    TSNode name = ts_node_named_child(child, j);
                    if (is_type(name, "scoped_identifier") || is_type(name, "identifier"))
                        return node_text(tree, name);
                }
            }
        }
        return "";
    }

    void collect_class(const SourceTree& tree, const std::string& path,
                       const std::string& package, TSNode node,
                       const std::string& outer_display, bool outer_static) {
        TSNode name_node = child_field(node, "name");
        if (ts_node_is_null(name_node)) return;
        std::string name = node_text(tree, name_node);
        Modifiers mods = read_modifiers(tree, node);

        ClassSym cls;
        cls.name = name;
        cls.display = outer_display.empty() ? name : outer_display + "." + name;
        cls.package = package;
        cls.file = path;
        cls.line = node_line(node);
        cls.tree = &tree;
        cls.is_interface = is_type(node, "interface_declaration");
        cls.inner_nonstatic = !outer_display.empty() && !mods.is_static && !outer_static &&
                              !cls.is_interface;

        TSNode superclass = child_field(node, "superclass");
        if (!ts_node_is_null(superclass)) {
            uint32_t n = ts_node_named_child_count(superclass);
            if (n > 0)
                cls.superclass = type_text(tree, ts_node_named_child(superclass, 0));
        }

        TSNode body = child_field(node, "body");
        if (!ts_node_is_null(body)) {
            uint32_t n = ts_node_named_child_count(body);
            for (uint32_t i = 0; i < n; ++i) {
                TSNode member = ts_node_named_child(body, i);
                if (is_type(member, "field_declaration")) {
                    collect_field(tree, member, cls);
                } else if (is_type(member, "method_declaration") ||
                           is_type(member, "constructor_declaration")) {
                    collect_method(tree, member, cls);
                } else if (is_type(member, "class_declaration") ||
                           is_type(member, "interface_declaration") ||
                           is_type(member, "enum_declaration")) {
                    collect_class(tree, path, package, member, cls.display,
                                  mods.is_static || outer_display.empty());
                    TSNode nested_name = child_field(member, "name");
                    if (!ts_node_is_null(nested_name))
                        cls.nested.push_back(node_text(tree, nested_name));
                }
            }
        }

        if (classes_.count(name)) {
            report(path, cls.line, "duplicate class: " + cls.display);
            return;
        }
        classes_[name] = std::move(cls);
    }

    void collect_field(const SourceTree& tree, TSNode node, ClassSym& cls) {
        Modifiers mods = read_modifiers(tree, node);
        std::string type = type_text(tree, child_field(node, "type"));
        uint32_t n = ts_node_named_child_count(node);
        for (uint32_t i = 0; i < n; ++i) {
            TSNode declarator = ts_node_named_child(node, i);
            if (!is_type(declarator, "variable_declarator")) continue;
            TSNode name_node = child_field(declarator, "name");
            if (ts_node_is_null(name_node)) continue;
            FieldSym field;
            field.name = node_text(tree, name_node);
            field.type = type;
            field.is_static = mods.is_static;
            field.is_final = mods.is_final;
            field.is_private = mods.is_private;
            field.is_public = mods.is_public;
            field.line = node_line(declarator);
            cls.fields.push_back(std::move(field));
        }
    }

    void collect_method(const SourceTree& tree, TSNode node, ClassSym& cls) {
        Modifiers mods = read_modifiers(tree, node);
        MethodSym method;
        method.is_constructor = is_type(node, "constructor_declaration");
        TSNode name_node = child_field(node, "name");
        if (ts_node_is_null(name_node)) return;
        method.name = node_text(tree, name_node);
        method.return_type = method.is_constructor
                                 ? "void"
                                 : type_text(tree, child_field(node, "type"));
        method.is_static = mods.is_static;
        method.is_private = mods.is_private;
        method.is_public = mods.is_public;
        method.is_abstract = mods.is_abstract || cls.is_interface;
        method.has_override = mods.has_override;
        method.override_line = mods.override_line;
        method.line = node_line(node);

        TSNode params = child_field(node, "parameters");
        if (!ts_node_is_null(params)) {
            uint32_t n = ts_node_named_child_count(params);
            for (uint32_t i = 0; i < n; ++i) {
                TSNode param = ts_node_named_child(params, i);
                if (!is_type(param, "formal_parameter") &&
                    !is_type(param, "spread_parameter"))
                    continue;
                ParamSym p;
                p.type = type_text(tree, child_field(param, "type"));
                TSNode pname = child_field(param, "name");
                if (!ts_node_is_null(pname)) p.name = node_text(tree, pname);
                method.params.push_back(std::move(p));
            }
        }
        TSNode body = child_field(node, "body");
        if (!ts_node_is_null(body)) {
            method.body = body;
            method.has_body = true;
        }
        cls.methods.push_back(std::move(method));
    }

    // ---- pass 3: per-class checks -------------------------------------------

    std::string signature(const MethodSym& method) {
        std::string out = method.name + "(";
        for (size_t i = 0; i < method.params.size(); ++i) {
            if (i) out += ",";
            out += method.params[i].type;
        }
        return out + ")";
    }

    void check_class(ClassSym& cls) {
        current_class_ = &cls;

        std::set<std::string> field_names;
        for (const auto& field : cls.fields) {
            if (!field_names.insert(field.name).second)
                report(cls.file, field.line,
                       "variable " + field.name + " is already defined in class " +
                           cls.display);
            if (field.is_static && cls.inner_nonstatic && !field.is_final)
                report(cls.file, field.line,
                       "illegal static declaration in inner class " + cls.display,
                       {"modifier 'static' is only allowed in constant variable "
                        "declarations"});
        }

        std::set<std::string> method_sigs;
        for (const auto& method : cls.methods) {
            if (!method_sigs.insert(signature(method)).second)
                report(cls.file, method.line,
                       "method " + signature(method) + " is already defined in class " +
                           cls.display);
            if (method.is_static && cls.inner_nonstatic)
                report(cls.file, method.line,
                       "illegal static declaration in inner class " + cls.display,
                       {"modifier 'static' is only allowed in constant variable "
                        "declarations"});
            if (method.has_override && !overrides_something(cls, method))
                report(cls.file,
                       method.override_line ? method.override_line : method.line,
                       "method does not override or implement a method from a "
                       "supertype");
        }

        for (const auto& method : cls.methods) {
            if (!method.has_body) continue;
            current_method_ = &method;
            scopes_.clear();
            scopes_.emplace_back();
            for (const auto& param : method.params)
                scopes_.back()[param.name] = {param.type, false};
            check_block(method.body);
            if (!method.is_constructor && method.return_type != "void" &&
                !returns_always(method.body)) {
                TSPoint end = ts_node_end_point(method.body);
                report(cls.file, static_cast<int>(end.row) + 1,
                       "missing return statement");
            }
            current_method_ = nullptr;
        }
        current_class_ = nullptr;
    }

    bool overrides_something(const ClassSym& cls, const MethodSym& method) {
        static const std::unordered_set<std::string> kObjectMethods = {
            "toString", "equals", "hashCode", "clone", "finalize"};
        if (kObjectMethods.count(method.name)) return true;
        std::optional<std::string> super = cls.superclass;
        int guard = 0;
        while (super && guard++ < 16) {
            auto it = classes_.find(*super);
            if (it == classes_.end()) return true; // unknown supertype: benefit of doubt
            for (const auto& candidate : it->second.methods)
                if (candidate.name == method.name &&
                    candidate.params.size() == method.params.size())
                    return true;
            super = it->second.superclass;
        }
        return false;
    }

    // ---- statements ----------------------------------------------------------

    const std::string& path() const { return current_class_->file; }
    const SourceTree& tree() const { return *current_class_->tree; }

    void check_block(TSNode block) {
        scopes_.emplace_back();
        uint32_t n = ts_node_named_child_count(block);
        for (uint32_t i = 0; i < n; ++i) check_statement(ts_node_named_child(block, i));
        scopes_.pop_back();
    }

    void check_statement(TSNode node) {
        std::string_view kind = ts_node_type(node);
        if (kind == "local_variable_declaration") {
            check_local_declaration(node);
        } else if (kind == "expression_statement") {
            TSNode expr = ts_node_named_child(node, 0);
            if (is_type(expr, "parenthesized_expression"))
                report(path(), node_line(node), "illegal parenthesized expression");
            else if (!ts_node_is_null(expr))
                eval(expr);
        } else if (kind == "block") {
            check_block(node);
        } else if (kind == "if_statement") {
            eval_field(node, "condition");
            check_substatement(child_field(node, "consequence"));
            check_substatement(child_field(node, "alternative"));
        } else if (kind == "while_statement" || kind == "do_statement") {
            eval_field(node, "condition");
            check_substatement(child_field(node, "body"));
        } else if (kind == "for_statement") {
            scopes_.emplace_back();
            TSNode init = child_field(node, "init");
            if (!ts_node_is_null(init)) {
                if (is_type(init, "local_variable_declaration"))
                    check_local_declaration(init);
                else
                    eval(init);
            }
            eval_field(node, "condition");
            eval_field(node, "update");
            check_substatement(child_field(node, "body"));
            scopes_.pop_back();
        } else if (kind == "enhanced_for_statement") {
            scopes_.emplace_back();
            eval_field(node, "value");
            std::string type = type_text(tree(), child_field(node, "type"));
            TSNode name = child_field(node, "name");
            if (!ts_node_is_null(name))
                scopes_.back()[node_text_str(name)] = {element_type(type), false};
            check_substatement(child_field(node, "body"));
            scopes_.pop_back();
        } else if (kind == "return_statement") {
            TSNode value = ts_node_named_child(node, 0);
            std::string value_type = ts_node_is_null(value) ? "void" : eval(value);
            if (current_method_ && !ts_node_is_null(value))
                check_convertible(value_type, current_method_->return_type,
                                  node_line(node));
        } else if (kind == "throw_statement") {
            TSNode value = ts_node_named_child(node, 0);
            if (!ts_node_is_null(value)) eval(value);
        } else if (kind == "try_statement") {
            check_substatement(child_field(node, "body"));
            uint32_t n = ts_node_named_child_count(node);
            for (uint32_t i = 0; i < n; ++i) {
                TSNode clause = ts_node_named_child(node, i);
                if (is_type(clause, "catch_clause")) {
                    scopes_.emplace_back();
                    TSNode param = ts_node_named_child(clause, 0);
                    if (is_type(param, "catch_formal_parameter")) {
                        TSNode pname = child_field(param, "name");
                        if (!ts_node_is_null(pname))
                            scopes_.back()[node_text_str(pname)] = {"Throwable", false};
                    }
                    check_substatement(child_field(clause, "body"));
                    scopes_.pop_back();
                } else if (is_type(clause, "finally_clause")) {
                    uint32_t m = ts_node_named_child_count(clause);
                    for (uint32_t j = 0; j < m; ++j)
                        check_substatement(ts_node_named_child(clause, j));
                }
            }
        } else if (kind == "switch_expression" || kind == "switch_statement") {
            eval_field(node, "condition");
            TSNode body = child_field(node, "body");
            if (!ts_node_is_null(body)) {
                uint32_t n = ts_node_named_child_count(body);
                for (uint32_t i = 0; i < n; ++i) {
                    TSNode group = ts_node_named_child(body, i);
                    uint32_t m = ts_node_named_child_count(group);
                    for (uint32_t j = 0; j < m; ++j) {
                        TSNode item = ts_node_named_child(group, j);
                        if (!is_type(item, "switch_label")) check_statement(item);
                    }
                }
            }
        } else if (kind == "labeled_statement") {
            uint32_t n = ts_node_named_child_count(node);
            for (uint32_t i = 0; i < n; ++i) check_substatement(ts_node_named_child(node, i));
        } else if (kind == "break_statement" || kind == "continue_statement" ||
                   kind == "line_comment" || kind == "block_comment" || kind == ";") {
            // nothing to resolve
        } else if (kind == "local_class_declaration" || kind == "class_declaration") {
            // local classes are outside the subset; skip silently
        } else if (kind == "assert_statement") {
            uint32_t n = ts_node_named_child_count(node);
            for (uint32_t i = 0; i < n; ++i) eval(ts_node_named_child(node, i));
        } else {
            // unknown statement kind: evaluate children conservatively
            uint32_t n = ts_node_named_child_count(node);
            for (uint32_t i = 0; i < n; ++i) check_substatement(ts_node_named_child(node, i));
        }
    }

    void check_substatement(TSNode node) {
        if (ts_node_is_null(node)) return;
        if (is_type(node, "block"))
            check_block(node);
        else
            check_statement(node);
    }

    void eval_field(TSNode node, const char* field) {
        TSNode child = child_field(node, field);
        if (!ts_node_is_null(child)) {
            if (is_type(child, "parenthesized_expression")) {
                TSNode inner = ts_node_named_child(child, 0);
                if (!ts_node_is_null(inner)) eval(inner);
            } else {
                eval(child);
            }
        }
    }

    void check_local_declaration(TSNode node) {
        Modifiers mods = read_modifiers(tree(), node);
        if (mods.is_static)
            report(path(), mods.static_line ? mods.static_line : node_line(node),
                   "modifier static not allowed here");
        std::string type = type_text(tree(), child_field(node, "type"));
        uint32_t n = ts_node_named_child_count(node);
        for (uint32_t i = 0; i < n; ++i) {
            TSNode declarator = ts_node_named_child(node, i);
            if (!is_type(declarator, "variable_declarator")) continue;
            TSNode name = child_field(declarator, "name");
            TSNode value = child_field(declarator, "value");
            if (!ts_node_is_null(value)) {
                std::string value_type = eval(value);
                check_convertible(value_type, type, node_line(declarator));
            }
            if (!ts_node_is_null(name))
                scopes_.back()[node_text_str(name)] = {type, mods.is_final};
        }
    }

    // ---- expressions ----------------------------------------------------------

    std::string node_text_str(TSNode node) { return std::string(tree().text(node)); }

    const VarInfo* lookup_var(const std::string& name) {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto found = it->find(name);
            if (found != it->end()) return &found->second;
        }
        return nullptr;
    }

    const FieldSym* lookup_field(const ClassSym& cls, const std::string& name) {
        for (const auto& field : cls.fields)
            if (field.name == name) return &field;
        if (cls.superclass) {
            auto it = classes_.find(*cls.superclass);
            if (it != classes_.end()) return lookup_field(it->second, name);
        }
        return nullptr;
    }

    std::vector<const MethodSym*> lookup_methods(const ClassSym& cls,
                                                 const std::string& name) {
        std::vector<const MethodSym*> out;
        for (const auto& method : cls.methods)
            if (method.name == name) out.push_back(&method);
        if (cls.superclass) {
            auto it = classes_.find(*cls.superclass);
            if (it != classes_.end())
                for (const auto* inherited : lookup_methods(it->second, name))
                    out.push_back(inherited);
        }
        return out;
    }

    std::string element_type(const std::string& array_type) {
        if (array_type.size() > 2 && array_type.ends_with("[]"))
            return array_type.substr(0, array_type.size() - 2);
        return "?";
    }

    bool numeric(const std::string& t) {
        return t == "int" || t == "long" || t == "double" || t == "float" ||
               t == "short" || t == "byte" || t == "char";
    }

    void check_convertible(const std::string& from, const std::string& to, int line) {
        if (from == "?" || to == "?" || from == to || to == "var") return;
        if (from == "null") {
            if (kPrimitiveTypes.count(to))
                report(path(), line,
                       "incompatible types: <null> cannot be converted to " + to);
            return;
        }
        if (to == "Object" || to == "CharSequence" || to == "Comparable") return;
        if (numeric(from) && numeric(to)) {
            static const std::map<std::string, int> rank = {
                {"byte", 1}, {"short", 2}, {"char", 2}, {"int", 3},
                {"long", 4}, {"float", 5}, {"double", 6}};
            if (rank.at(from) > rank.at(to))
                report(path(), line,
                       "incompatible types: possible lossy conversion from " + from +
                           " to " + to);
            return;
        }
        if (numeric(from) != numeric(to) || (from == "boolean") != (to == "boolean")) {
            if (from == "boolean" || to == "boolean" || from == "String" ||
                to == "String")
                report(path(), line,
                       "incompatible types: " + from + " cannot be converted to " + to);
            return;
        }
    }

    // Returns the inferred type name, "?" when unknown. Emits diagnostics for
    // unresolved names as a side effect.
    std::string eval(TSNode node) {
        if (ts_node_is_null(node)) return "?";
        std::string_view kind = ts_node_type(node);

        if (kind == "identifier") return eval_identifier(node);
        if (kind == "decimal_integer_literal" || kind == "hex_integer_literal" ||
            kind == "octal_integer_literal" || kind == "binary_integer_literal") {
            std::string text = node_text_str(node);
            return (text.ends_with("l") || text.ends_with("L")) ? "long" : "int";
        }
        if (kind == "decimal_floating_point_literal" ||
            kind == "hex_floating_point_literal")
            return "double";
        if (kind == "string_literal" || kind == "text_block") return "String";
        if (kind == "character_literal") return "char";
        if (kind == "true" || kind == "false") return "boolean";
        if (kind == "null_literal") return "null";
        if (kind == "this") return current_class_ ? current_class_->name : "?";

        if (kind == "parenthesized_expression") {
            TSNode inner = ts_node_named_child(node, 0);
            return eval(inner);
        }
        if (kind == "binary_expression") return eval_binary(node);
        if (kind == "unary_expression") {
            TSNode operand = child_field(node, "operand");
            std::string op = operator_text(node, operand);
            std::string t = eval(operand);
            if (op == "!") return "boolean";
            return t == "?" ? "?" : t;
        }
        if (kind == "update_expression") {
            uint32_t n = ts_node_named_child_count(node);
            for (uint32_t i = 0; i < n; ++i) eval(ts_node_named_child(node, i));
            return "?";
        }
        if (kind == "assignment_expression") return eval_assignment(node);
        if (kind == "ternary_expression") {
            eval_field(node, "condition");
            std::string t = eval(child_field(node, "consequence"));
            std::string u = eval(child_field(node, "alternative"));
            return t == u ? t : (numeric(t) && numeric(u) ? t : "?");
        }
        if (kind == "method_invocation") return eval_invocation(node);
        if (kind == "field_access") return eval_field_access(node);
        if (kind == "object_creation_expression") return eval_new(node);
        if (kind == "array_access") {
            std::string array = eval(child_field(node, "array"));
            eval_field(node, "index");
            return element_type(array);
        }
        if (kind == "array_creation_expression")
            return type_text(tree(), child_field(node, "type")) + "[]";
        if (kind == "array_initializer") {
            uint32_t n = ts_node_named_child_count(node);
            for (uint32_t i = 0; i < n; ++i) eval(ts_node_named_child(node, i));
            return "?";
        }
        if (kind == "cast_expression") {
            eval_field(node, "value");
            return type_text(tree(), child_field(node, "type"));
        }
        if (kind == "instanceof_expression") {
            eval_field(node, "left");
            return "boolean";
        }
        if (kind == "lambda_expression") {
            // parameters get unknown types; good enough for resolution
            scopes_.emplace_back();
            TSNode params = child_field(node, "parameters");
            if (!ts_node_is_null(params)) {
                if (is_type(params, "identifier")) {
                    scopes_.back()[node_text_str(params)] = {"?", false};
                } else {
                    uint32_t n = ts_node_named_child_count(params);
                    for (uint32_t i = 0; i < n; ++i) {
                        TSNode p = ts_node_named_child(params, i);
                        TSNode pname = is_type(p, "formal_parameter")
                                           ? child_field(p, "name")
                                           : p;
                        if (is_type(pname, "identifier"))
                            scopes_.back()[node_text_str(pname)] = {"?", false};
                    }
                }
            }
            TSNode body = child_field(node, "body");
            if (is_type(body, "block"))
                check_block(body);
            else if (!ts_node_is_null(body))
                eval(body);
            scopes_.pop_back();
            return "?";
        }
        if (kind == "method_reference") return "?";
        if (kind == "switch_expression") {
            check_statement(node);
            return "?";
        }

        // conservative default: visit children
        uint32_t n = ts_node_named_child_count(node);
        for (uint32_t i = 0; i < n; ++i) eval(ts_node_named_child(node, i));
        return "?";
    }

    std::string operator_text(TSNode node, TSNode operand) {
        // the operator is the unnamed child that is not the operand
        uint32_t n = ts_node_child_count(node);
        for (uint32_t i = 0; i < n; ++i) {
            TSNode child = ts_node_child(node, i);
            if (!ts_node_is_named(child)) return node_text_str(child);
            (void)operand;
        }
        return "";
    }

    std::string eval_identifier(TSNode node) {
        std::string name = node_text_str(node);
        if (const VarInfo* var = lookup_var(name)) return var->type;
        if (current_class_) {
            if (const FieldSym* field = lookup_field(*current_class_, name)) {
                if (current_method_ && current_method_->is_static && !field->is_static)
                    report(path(), node_line(node),
                           "non-static variable " + name +
                               " cannot be referenced from a static context");
                return field->type;
            }
        }
        if (classes_.count(name) || kBuiltinClasses.count(name)) return "class:" + name;
        report(path(), node_line(node), "cannot find symbol",
               {"symbol:   variable " + name,
                "location: class " + (current_class_ ? current_class_->display : "?")});
        return "?";
    }

    std::string eval_binary(TSNode node) {
        TSNode left = child_field(node, "left");
        TSNode right = child_field(node, "right");
        TSNode op_node = child_field(node, "operator");
        std::string op = ts_node_is_null(op_node) ? "" : node_text_str(op_node);
        std::string lt = eval(left);
        std::string rt = eval(right);
        if (op == "&&" || op == "||" || op == "==" || op == "!=" || op == "<" ||
            op == ">" || op == "<=" || op == ">=" || op == "instanceof")
            return "boolean";
        if (op == "+" && (lt == "String" || rt == "String")) return "String";
        if (numeric(lt) && numeric(rt)) {
            static const std::map<std::string, int> rank = {
                {"byte", 1}, {"short", 2}, {"char", 2}, {"int", 3},
                {"long", 4}, {"float", 5}, {"double", 6}};
            return rank.at(lt) >= rank.at(rt) ? lt : rt;
        }
        return "?";
    }

    std::string eval_assignment(TSNode node) {
        TSNode left = child_field(node, "left");
        TSNode right = child_field(node, "right");
        std::string right_type = eval(right);

        if (is_type(left, "parenthesized_expression")) {
            report(path(), node_line(left), "illegal parenthesized expression");
            return "?";
        }
        if (is_type(left, "identifier")) {
            std::string name = node_text_str(left);
            if (const VarInfo* var = lookup_var(name)) {
                if (var->is_final)
                    report(path(), node_line(left),
                           "cannot assign a value to final variable " + name);
                check_convertible(right_type, var->type, node_line(node));
                return var->type;
            }
            if (current_class_) {
                if (const FieldSym* field = lookup_field(*current_class_, name)) {
                    if (current_method_ && current_method_->is_static &&
                        !field->is_static)
                        report(path(), node_line(left),
                               "non-static variable " + name +
                                   " cannot be referenced from a static context");
                    if (field->is_final)
                        report(path(), node_line(left),
                               "cannot assign a value to final variable " + name);
                    check_convertible(right_type, field->type, node_line(node));
                    return field->type;
                }
            }
            report(path(), node_line(left), "cannot find symbol",
                   {"symbol:   variable " + name,
                    "location: class " +
                        (current_class_ ? current_class_->display : "?")});
            return "?";
        }
        return eval(left);
    }

    std::string eval_field_access(TSNode node) {
        TSNode object = child_field(node, "object");
        TSNode field = child_field(node, "field");
        std::string field_name = ts_node_is_null(field) ? "" : node_text_str(field);

        if (is_type(object, "this")) {
            if (current_class_) {
                if (const FieldSym* sym = lookup_field(*current_class_, field_name))
                    return sym->type;
                report(path(), node_line(node), "cannot find symbol",
                       {"symbol:   variable " + field_name,
                        "location: class " + current_class_->display});
            }
            return "?";
        }

        std::string object_type = eval(object);
        if (object_type.starts_with("class:")) {
            std::string class_name = object_type.substr(6);
            if (kBuiltinClasses.count(class_name)) return "?"; // System.out and kin
            auto it = classes_.find(class_name);
            if (it != classes_.end()) {
                if (const FieldSym* sym = lookup_field(it->second, field_name)) {
                    check_member_access(it->second, sym->is_private, sym->is_public,
                                        field_name, node_line(node));
                    if (!sym->is_static)
                        report(path(), node_line(node),
                               "non-static variable " + field_name +
                                   " cannot be referenced from a static context");
                    return sym->type;
                }
                report(path(), node_line(node), "cannot find symbol",
                       {"symbol:   variable " + field_name,
                        "location: class " + it->second.display});
                return "?";
            }
            return "?";
        }
        if (object_type.ends_with("[]") && field_name == "length") return "int";
        auto it = classes_.find(object_type);
        if (it != classes_.end()) {
            if (const FieldSym* sym = lookup_field(it->second, field_name)) {
                check_member_access(it->second, sym->is_private, sym->is_public,
                                    field_name, node_line(node));
                return sym->type;
            }
            report(path(), node_line(node), "cannot find symbol",
                   {"symbol:   variable " + field_name,
                    "location: class " + it->second.display});
        }
        return "?";
    }

    void check_member_access(const ClassSym& owner, bool is_private, bool is_public,
                             const std::string& member, int line) {
        if (!current_class_ || owner.name == current_class_->name) return;
        if (is_private) {
            report(path(), line,
                   member + " has private access in " + owner.display);
        } else if (!is_public && owner.package != current_class_->package) {
            report(path(), line,
                   member + " is not public in " + owner.display +
                       "; cannot be accessed from outside package");
        }
    }

    std::string eval_new(TSNode node) {
        std::string type = type_text(tree(), child_field(node, "type"));
        std::string bare = type.substr(0, type.find('<'));
        std::vector<std::string> arg_types = eval_arguments(node);

        if (kBuiltinClasses.count(bare)) return bare;
        auto it = classes_.find(bare);
        if (it == classes_.end()) {
            report(path(), node_line(node), "cannot find symbol",
                   {"symbol:   class " + bare,
                    "location: class " +
                        (current_class_ ? current_class_->display : "?")});
            return "?";
        }
        std::vector<const MethodSym*> ctors;
        for (const auto& method : it->second.methods)
            if (method.is_constructor) ctors.push_back(&method);
        if (!ctors.empty()) {
            bool arity_ok = false;
            for (const auto* ctor : ctors)
                if (ctor->params.size() == arg_types.size()) arity_ok = true;
            if (!arity_ok)
                report(path(), node_line(node),
                       "constructor " + bare + " in class " + it->second.display +
                           " cannot be applied to given types;",
                       applied_notes(*ctors.front(), arg_types));
        } else if (!arg_types.empty()) {
            report(path(), node_line(node),
                   "constructor " + bare + " in class " + it->second.display +
                       " cannot be applied to given types;",
                   {"required: no arguments",
                    "found:    " + join_types(arg_types),
                    "reason: actual and formal argument lists differ in length"});
        }
        return bare;
    }

    std::vector<std::string> eval_arguments(TSNode node) {
        std::vector<std::string> types;
        TSNode args = child_field(node, "arguments");
        if (ts_node_is_null(args)) return types;
        uint32_t n = ts_node_named_child_count(args);
        for (uint32_t i = 0; i < n; ++i) types.push_back(eval(ts_node_named_child(args, i)));
        return types;
    }

    std::string join_types(const std::vector<std::string>& types) {
        if (types.empty()) return "no arguments";
        std::string out;
        for (size_t i = 0; i < types.size(); ++i) {
            if (i) out += ",";
            out += types[i] == "?" ? "Object" : types[i];
        }
        return out;
    }

    std::vector<std::string> applied_notes(const MethodSym& method,
                                           const std::vector<std::string>& found) {
        std::vector<std::string> required;
        for (const auto& param : method.params) required.push_back(param.type);
        return {"required: " + join_types(required), "found:    " + join_types(found),
                "reason: actual and formal argument lists differ in length"};
    }

    std::string eval_invocation(TSNode node) {
        TSNode object = child_field(node, "object");
        TSNode name_node = child_field(node, "name");
        std::string name = ts_node_is_null(name_node) ? "" : node_text_str(name_node);
        std::vector<std::string> arg_types = eval_arguments(node);

        if (ts_node_is_null(object)) {
            if (!current_class_) return "?";
            auto candidates = lookup_methods(*current_class_, name);
            if (candidates.empty()) {
                report(path(), node_line(node), "cannot find symbol",
                       {"symbol:   method " + name + "(" + join_types(arg_types) + ")",
                        "location: class " + current_class_->display});
                return "?";
            }
            return check_call(*current_class_, candidates, name, arg_types,
                              node_line(node), /*static_call=*/false,
                              /*via_instance=*/false);
        }

        std::string object_type = eval(object);
        if (object_type.starts_with("class:")) {
            std::string class_name = object_type.substr(6);
            if (kBuiltinClasses.count(class_name)) {
                auto known = kBuiltinReturns.find(class_name + "." + name);
                if (known != kBuiltinReturns.end()) {
                    if (known->second == "?" && !arg_types.empty())
                        return arg_types.front();
                    return known->second;
                }
                return "?";
            }
            auto it = classes_.find(class_name);
            if (it == classes_.end()) return "?";
            auto candidates = lookup_methods(it->second, name);
            if (candidates.empty()) {
                report(path(), node_line(node), "cannot find symbol",
                       {"symbol:   method " + name + "(" + join_types(arg_types) + ")",
                        "location: class " + it->second.display});
                return "?";
            }
            return check_call(it->second, candidates, name, arg_types, node_line(node),
                              /*static_call=*/true, /*via_instance=*/false);
        }

        if (object_type == "String" || object_type == "?" || object_type == "null") {
            auto known = kBuiltinReturns.find("." + name);
            if (known != kBuiltinReturns.end()) return known->second;
            return "?";
        }
        auto it = classes_.find(object_type);
        if (it != classes_.end()) {
            auto candidates = lookup_methods(it->second, name);
            if (candidates.empty()) {
                auto known = kBuiltinReturns.find("." + name);
                if (known != kBuiltinReturns.end()) return known->second; // toString etc.
                report(path(), node_line(node), "cannot find symbol",
                       {"symbol:   method " + name + "(" + join_types(arg_types) + ")",
                        "location: class " + it->second.display});
                return "?";
            }
            return check_call(it->second, candidates, name, arg_types, node_line(node),
                              /*static_call=*/false, /*via_instance=*/true);
        }
        auto known = kBuiltinReturns.find("." + name);
        if (known != kBuiltinReturns.end()) return known->second;
        return "?";
    }

    std::string check_call(const ClassSym& owner,
                           const std::vector<const MethodSym*>& candidates,
                           const std::string& name,
                           const std::vector<std::string>& arg_types, int line,
                           bool static_call, bool via_instance) {
        const MethodSym* arity_match = nullptr;
        for (const auto* candidate : candidates)
            if (candidate->params.size() == arg_types.size()) {
                arity_match = candidate;
                break;
            }
        if (!arity_match) {
            report(path(), line,
                   "method " + name + " in class " + owner.display +
                       " cannot be applied to given types;",
                   applied_notes(*candidates.front(), arg_types));
            return candidates.front()->return_type;
        }
        check_member_access(owner, arity_match->is_private, arity_match->is_public, name,
                            line);
        if (static_call && !arity_match->is_static)
            report(path(), line,
                   "non-static method " + signature(*arity_match) +
                       " cannot be referenced from a static context");
        if (!static_call && !via_instance && current_method_ &&
            current_method_->is_static && !arity_match->is_static)
            report(path(), line,
                   "non-static method " + signature(*arity_match) +
                       " cannot be referenced from a static context");
        for (size_t i = 0; i < arg_types.size(); ++i)
            check_convertible(arg_types[i], arity_match->params[i].type, line);
        return arity_match->return_type;
    }

    // ---- reachability ---------------------------------------------------------

    bool returns_always(TSNode node) {
        if (ts_node_is_null(node)) return false;
        std::string_view kind = ts_node_type(node);
        if (kind == "return_statement" || kind == "throw_statement") return true;
        if (kind == "block") {
            uint32_t n = ts_node_named_child_count(node);
            for (uint32_t i = n; i > 0; --i) {
                TSNode child = ts_node_named_child(node, i - 1);
                std::string_view child_kind = ts_node_type(child);
                if (child_kind == "line_comment" || child_kind == "block_comment")
                    continue;
                return returns_always(child);
            }
            return false;
        }
        if (kind == "if_statement") {
            TSNode alternative = child_field(node, "alternative");
            if (ts_node_is_null(alternative)) return false;
            return returns_always(child_field(node, "consequence")) &&
                   returns_always(alternative);
        }
        if (kind == "while_statement") {
            TSNode condition = child_field(node, "condition");
            std::string text = ts_node_is_null(condition) ? "" : node_text_str(condition);
            return text == "(true)";
        }
        if (kind == "try_statement") {
            return returns_always(child_field(node, "body"));
        }
        if (kind == "labeled_statement") {
            uint32_t n = ts_node_named_child_count(node);
            return n > 0 && returns_always(ts_node_named_child(node, n - 1));
        }
        return false;
    }
};

} // namespace

CheckResult check(const std::vector<SourceFile>& files) { return Checker(files).run(); }

std::string format_diagnostics(const CheckResult& result) {
    std::string out;
    for (const auto& diagnostic : result.diagnostics) {
        out += fmt::format("{}:{}: error: {}\n", diagnostic.path, diagnostic.line,
                           diagnostic.message);
        for (const auto& note : diagnostic.notes) out += "  " + note + "\n";
    }
    if (!result.diagnostics.empty())
        out += fmt::format("{} error{}\n", result.diagnostics.size(),
                           result.diagnostics.size() == 1 ? "" : "s");
    return out;
}

} // namespace javamini
