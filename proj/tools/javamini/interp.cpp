#include "javamini.hpp"

#include "reflab/java/tree.hpp"

#include <fmt/format.h>
#include <tree_sitter/api.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <variant>

namespace javamini {

namespace {

using reflab::java::SourceTree;

bool is_type(TSNode node, const char* name) {
    return !ts_node_is_null(node) && std::string_view(ts_node_type(node)) == name;
}

TSNode child_field(TSNode node, const char* field) {
    return ts_node_child_by_field_name(node, field, static_cast<uint32_t>(strlen(field)));
}

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

struct Instance;
struct ArrayVal;

struct CharVal {
    char32_t c = 0;
};

using Value = std::variant<std::monostate, int64_t, double, bool, CharVal, std::string,
                           std::shared_ptr<Instance>, std::shared_ptr<ArrayVal>>;

struct Instance {
    std::string class_name;
    std::map<std::string, Value> fields;
};

struct ArrayVal {
    std::string elem_type;
    std::vector<Value> items;
};

bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

// Thrown Java exception propagating through the interpreter.
struct JavaThrow {
    std::string type;
    std::string message;
};

// Construct the interpreter can't execute; surfaces as an ERROR outcome.
struct Unsupported : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Program model
// ---------------------------------------------------------------------------

struct FieldRt {
    std::string name;
    std::string type;
    bool is_static = false;
    TSNode init{};
    bool has_init = false;
};

struct MethodRt {
    std::string name;
    std::vector<std::string> param_types;
    std::vector<std::string> param_names;
    std::string return_type;
    bool is_static = false;
    bool is_constructor = false;
    TSNode body{};
    bool has_body = false;
};

struct ClassRt {
    std::string name;
    std::optional<std::string> superclass;
    std::vector<FieldRt> fields;
    std::vector<MethodRt> methods;
    const SourceTree* tree = nullptr;
};

const std::unordered_map<std::string, std::string> kExceptionParents = {
    {"RuntimeException", "Exception"},
    {"Exception", "Throwable"},
    {"Error", "Throwable"},
    {"AssertionError", "Error"},
    {"StackOverflowError", "Error"},
    {"ArithmeticException", "RuntimeException"},
    {"IllegalArgumentException", "RuntimeException"},
    {"IllegalStateException", "RuntimeException"},
    {"NullPointerException", "RuntimeException"},
    {"ClassCastException", "RuntimeException"},
    {"UnsupportedOperationException", "RuntimeException"},
    {"NumberFormatException", "IllegalArgumentException"},
    {"IndexOutOfBoundsException", "RuntimeException"},
    {"ArrayIndexOutOfBoundsException", "IndexOutOfBoundsException"},
    {"StringIndexOutOfBoundsException", "IndexOutOfBoundsException"}};

// ---------------------------------------------------------------------------
// Interpreter
// ---------------------------------------------------------------------------

class Interp {
public:
    explicit Interp(const std::vector<SourceFile>& files) { load(files); }

    TestRunResult run() {
        TestRunResult result;
        for (const auto& class_name : class_order_) {
            if (!class_name.ends_with("Test")) continue;
            const ClassRt& cls = classes_.at(class_name);
            for (const auto& method : cls.methods) {
                if (!method.is_static || method.is_constructor) continue;
                if (!method.name.starts_with("test")) continue;
                if (!method.param_types.empty()) continue;
                TestOutcome outcome;
                outcome.id = class_name + "." + method.name;
                try {
                    steps_ = 0;
                    depth_ = 0;
                    call_static(class_name, method, {});
                    outcome.status = TestStatus::pass;
                } catch (const JavaThrow& thrown) {
                    outcome.status = extends(thrown.type, "AssertionError")
                                         ? TestStatus::fail
                                         : TestStatus::error;
                    outcome.detail = thrown.message.empty()
                                         ? thrown.type
                                         : thrown.type + ": " + thrown.message;
                } catch (const Unsupported& e) {
                    outcome.status = TestStatus::error;
                    outcome.detail = e.what();
                }
                result.outcomes.push_back(std::move(outcome));
            }
        }
        result.stdout_text = stdout_;
        return result;
    }

    const std::string& load_error() const { return load_error_; }

private:
    std::vector<std::unique_ptr<SourceTree>> trees_;
    std::map<std::string, ClassRt> classes_;
    std::vector<std::string> class_order_;
    std::map<std::string, std::map<std::string, Value>> statics_;
    std::map<std::string, int> class_state_; // 0 untouched, 1 initializing, 2 ready
    std::string stdout_;
    std::string load_error_;
    uint64_t steps_ = 0;
    int depth_ = 0;

    struct Slot {
        Value value;
        std::string type;
    };
    using Scope = std::map<std::string, Slot>;

    struct Frame {
        std::vector<Scope> scopes;
        std::shared_ptr<Instance> self;
        std::string class_name;
    };
    std::vector<Frame> frames_;

    enum class FlowKind { normal, ret, brk, cont };
    struct Flow {
        FlowKind kind = FlowKind::normal;
        Value value;
    };

    // ---- loading -----------------------------------------------------------

    void load(const std::vector<SourceFile>& files) {
        for (const auto& file : files) {
            auto outcome = reflab::java::parse_source(file.text);
            if (!outcome.ok()) {
                load_error_ = file.path + ": " + outcome.message;
                continue;
            }
            trees_.push_back(std::make_unique<SourceTree>(std::move(*outcome.tree)));
            const SourceTree& tree = *trees_.back();
            TSNode root = tree.root();
            uint32_t n = ts_node_named_child_count(root);
            for (uint32_t i = 0; i < n; ++i) {
                TSNode child = ts_node_named_child(root, i);
                if (is_type(child, "class_declaration")) load_class(tree, child);
            }
        }
    }

    std::string clean_type(const SourceTree& tree, TSNode type_node) {
        if (ts_node_is_null(type_node)) return "?";
        std::string out;
        for (char c : tree.text(type_node))
            if (!isspace(static_cast<unsigned char>(c))) out += c;
        return out;
    }

    bool has_modifier(const SourceTree& tree, TSNode node, std::string_view word) {
        uint32_t n = ts_node_child_count(node);
        for (uint32_t i = 0; i < n; ++i) {
            TSNode child = ts_node_child(node, i);
            if (!is_type(child, "modifiers")) continue;
            uint32_t m = ts_node_child_count(child);
            for (uint32_t j = 0; j < m; ++j)
                if (tree.text(ts_node_child(child, j)) == word) return true;
        }
        return false;
    }

    void load_class(const SourceTree& tree, TSNode node) {
        TSNode name_node = child_field(node, "name");
        if (ts_node_is_null(name_node)) return;
        ClassRt cls;
        cls.name = std::string(tree.text(name_node));
        cls.tree = &tree;
        TSNode superclass = child_field(node, "superclass");
        if (!ts_node_is_null(superclass) && ts_node_named_child_count(superclass) > 0)
            cls.superclass = clean_type(tree, ts_node_named_child(superclass, 0));

        TSNode body = child_field(node, "body");
        if (!ts_node_is_null(body)) {
            uint32_t n = ts_node_named_child_count(body);
            for (uint32_t i = 0; i < n; ++i) {
                TSNode member = ts_node_named_child(body, i);
                if (is_type(member, "field_declaration")) {
                    bool is_static = has_modifier(tree, member, "static");
                    std::string type = clean_type(tree, child_field(member, "type"));
                    uint32_t m = ts_node_named_child_count(member);
                    for (uint32_t j = 0; j < m; ++j) {
                        TSNode declarator = ts_node_named_child(member, j);
                        if (!is_type(declarator, "variable_declarator")) continue;
                        FieldRt field;
                        TSNode fname = child_field(declarator, "name");
                        if (ts_node_is_null(fname)) continue;
                        field.name = std::string(tree.text(fname));
                        field.type = type;
                        field.is_static = is_static;
                        TSNode value = child_field(declarator, "value");
                        if (!ts_node_is_null(value)) {
                            field.init = value;
                            field.has_init = true;
                        }
                        cls.fields.push_back(std::move(field));
                    }
                } else if (is_type(member, "method_declaration") ||
                           is_type(member, "constructor_declaration")) {
                    MethodRt method;
                    method.is_constructor = is_type(member, "constructor_declaration");
                    TSNode mname = child_field(member, "name");
                    if (ts_node_is_null(mname)) continue;
                    method.name = std::string(tree.text(mname));
                    method.return_type =
                        method.is_constructor
                            ? "void"
                            : clean_type(tree, child_field(member, "type"));
                    method.is_static = has_modifier(tree, member, "static");
                    TSNode params = child_field(member, "parameters");
                    if (!ts_node_is_null(params)) {
                        uint32_t m = ts_node_named_child_count(params);
                        for (uint32_t j = 0; j < m; ++j) {
                            TSNode param = ts_node_named_child(params, j);
                            if (!is_type(param, "formal_parameter")) continue;
                            method.param_types.push_back(
                                clean_type(tree, child_field(param, "type")));
                            TSNode pname = child_field(param, "name");
                            method.param_names.push_back(
                                ts_node_is_null(pname)
                                    ? ""
                                    : std::string(tree.text(pname)));
                        }
                    }
                    TSNode mbody = child_field(member, "body");
                    if (!ts_node_is_null(mbody)) {
                        method.body = mbody;
                        method.has_body = true;
                    }
                    cls.methods.push_back(std::move(method));
                }
            }
        }
        if (!classes_.count(cls.name)) class_order_.push_back(cls.name);
        classes_[cls.name] = std::move(cls);
    }

    // ---- class/static lifecycle -----------------------------------------------

    Value default_value(const std::string& type) {
        if (type == "int" || type == "long" || type == "short" || type == "byte")
            return int64_t{0};
        if (type == "double" || type == "float") return 0.0;
        if (type == "boolean") return false;
        if (type == "char") return CharVal{0};
        return std::monostate{};
    }

    void ensure_class(const std::string& name) {
        auto it = classes_.find(name);
        if (it == classes_.end()) return;
        int& state = class_state_[name];
        if (state != 0) return;
        state = 1;
        if (it->second.superclass) ensure_class(*it->second.superclass);
        auto& slots = statics_[name];
        for (const auto& field : it->second.fields)
            if (field.is_static) slots[field.name] = default_value(field.type);
        Frame frame;
        frame.class_name = name;
        frame.scopes.emplace_back();
        frames_.push_back(std::move(frame));
        for (const auto& field : it->second.fields)
            if (field.is_static && field.has_init)
                slots[field.name] = coerce(eval(field.init), field.type);
        frames_.pop_back();
        state = 2;
    }

    const ClassRt* find_class(const std::string& name) {
        auto it = classes_.find(name);
        return it == classes_.end() ? nullptr : &it->second;
    }

    bool extends(const std::string& derived, const std::string& base) {
        std::string cursor = derived;
        int guard = 0;
        while (guard++ < 32) {
            if (cursor == base) return true;
            if (const ClassRt* cls = find_class(cursor)) {
                if (!cls->superclass) break;
                cursor = *cls->superclass;
                continue;
            }
            auto it = kExceptionParents.find(cursor);
            if (it == kExceptionParents.end()) break;
            cursor = it->second;
        }
        return false;
    }

    // ---- calls -------------------------------------------------------------

    int param_score(const std::string& param, const Value& arg) {
        if (std::holds_alternative<int64_t>(arg)) {
            if (param == "int" || param == "long" || param == "short" || param == "byte")
                return 2;
            if (param == "double" || param == "float" || param == "char") return 1;
            if (param == "Object") return 1;
            return 0;
        }
        if (std::holds_alternative<double>(arg)) {
            if (param == "double" || param == "float") return 2;
            return param == "Object" ? 1 : 0;
        }
        if (std::holds_alternative<bool>(arg))
            return param == "boolean" ? 2 : (param == "Object" ? 1 : 0);
        if (std::holds_alternative<CharVal>(arg)) {
            if (param == "char") return 2;
            if (param == "int" || param == "long" || param == "double") return 1;
            return param == "Object" ? 1 : 0;
        }
        if (std::holds_alternative<std::string>(arg)) {
            if (param == "String") return 2;
            if (param == "CharSequence" || param == "Object") return 1;
            return 0;
        }
        if (std::holds_alternative<std::shared_ptr<ArrayVal>>(arg)) {
            const auto& arr = std::get<std::shared_ptr<ArrayVal>>(arg);
            if (arr && param == arr->elem_type + "[]") return 2;
            if (arr && arr->elem_type == "?" && param.ends_with("[]")) return 1;
            return param == "Object" ? 1 : 0;
        }
        if (is_null(arg)) {
            static const char* primitives[] = {"int",  "long",  "double", "float",
                                               "char", "short", "byte",   "boolean"};
            for (const char* p : primitives)
                if (param == p) return 0;
            return 1;
        }
        const auto& obj = std::get<std::shared_ptr<Instance>>(arg);
        if (!obj) return 0;
        if (param == obj->class_name) return 2;
        if (param == "Object" || extends(obj->class_name, param)) return 1;
        return 0;
    }

    const MethodRt* select_method(const ClassRt& cls, const std::string& name,
                                  const std::vector<Value>& args, bool constructors) {
        const MethodRt* best = nullptr;
        int best_score = -1;
        const ClassRt* cursor = &cls;
        int guard = 0;
        while (cursor && guard++ < 32) {
            for (const auto& method : cursor->methods) {
                if (method.is_constructor != constructors) continue;
                if (!constructors && method.name != name) continue;
                if (method.param_types.size() != args.size()) continue;
                int score = 0;
                bool viable = true;
                for (size_t i = 0; i < args.size(); ++i) {
                    int s = param_score(method.param_types[i], args[i]);
                    if (s == 0) {
                        viable = false;
                        break;
                    }
                    score += s;
                }
                if (viable && score > best_score) {
                    best = &method;
                    best_score = score;
                }
            }
            if (best) return best; // nearest class wins
            cursor = cursor->superclass ? find_class(*cursor->superclass) : nullptr;
        }
        return best;
    }

    Value coerce(Value v, const std::string& type) {
        if ((type == "double" || type == "float")) {
            if (std::holds_alternative<int64_t>(v))
                return static_cast<double>(std::get<int64_t>(v));
            if (std::holds_alternative<CharVal>(v))
                return static_cast<double>(std::get<CharVal>(v).c);
        }
        if (type == "int" || type == "long" || type == "short" || type == "byte") {
            if (std::holds_alternative<CharVal>(v))
                return static_cast<int64_t>(std::get<CharVal>(v).c);
        }
        if (type == "char" && std::holds_alternative<int64_t>(v))
            return CharVal{static_cast<char32_t>(std::get<int64_t>(v))};
        if (type.ends_with("[]") &&
            std::holds_alternative<std::shared_ptr<ArrayVal>>(v)) {
            auto arr = std::get<std::shared_ptr<ArrayVal>>(v);
            if (arr && arr->elem_type == "?") {
                arr->elem_type = type.substr(0, type.size() - 2);
                for (Value& item : arr->items) item = coerce(std::move(item), arr->elem_type);
            }
        }
        return v;
    }

    Value call_method(const std::string& class_name, const MethodRt& method,
                      std::vector<Value> args, std::shared_ptr<Instance> self) {
        if (!method.has_body) {
            if (method.is_constructor) return std::monostate{};
            throw Unsupported("method " + class_name + "." + method.name +
                              " has no body");
        }
        if (++depth_ > 1500) {
            --depth_;
            throw JavaThrow{"StackOverflowError", ""};
        }
        Frame frame;
        frame.class_name = class_name;
        frame.self = std::move(self);
        frame.scopes.emplace_back();
        for (size_t i = 0; i < args.size(); ++i)
            frame.scopes.back()[method.param_names[i]] = {
                coerce(std::move(args[i]), method.param_types[i]),
                method.param_types[i]};
        frames_.push_back(std::move(frame));
        Flow flow;
        try {
            flow = exec_block(method.body);
        } catch (...) {
            frames_.pop_back();
            --depth_;
            throw;
        }
        frames_.pop_back();
        --depth_;
        if (flow.kind == FlowKind::ret)
            return coerce(std::move(flow.value), method.return_type);
        return std::monostate{};
    }

    Value call_static(const std::string& class_name, const MethodRt& method,
                      std::vector<Value> args) {
        ensure_class(class_name);
        return call_method(class_name, method, std::move(args), nullptr);
    }

    std::shared_ptr<Instance> instantiate(const std::string& class_name,
                                          std::vector<Value> args) {
        const ClassRt* cls = find_class(class_name);
        if (!cls) throw Unsupported("cannot instantiate unknown class " + class_name);
        ensure_class(class_name);
        auto instance = std::make_shared<Instance>();
        instance->class_name = class_name;
        // field defaults then initializers, base classes first
        std::vector<const ClassRt*> chain;
        const ClassRt* cursor = cls;
        int guard = 0;
        while (cursor && guard++ < 32) {
            chain.insert(chain.begin(), cursor);
            cursor = cursor->superclass ? find_class(*cursor->superclass) : nullptr;
        }
        for (const ClassRt* link : chain)
            for (const auto& field : link->fields)
                if (!field.is_static)
                    instance->fields[field.name] = default_value(field.type);
        for (const ClassRt* link : chain) {
            Frame frame;
            frame.class_name = link->name;
            frame.self = instance;
            frame.scopes.emplace_back();
            frames_.push_back(std::move(frame));
            try {
                for (const auto& field : link->fields)
                    if (!field.is_static && field.has_init)
                        instance->fields[field.name] =
                            coerce(eval(field.init), field.type);
            } catch (...) {
                frames_.pop_back();
                throw;
            }
            frames_.pop_back();
        }
        const MethodRt* ctor = select_method(*cls, "", args, /*constructors=*/true);
        if (ctor) {
            call_method(class_name, *ctor, std::move(args), instance);
        } else if (!args.empty()) {
            throw Unsupported("no matching constructor for " + class_name);
        } else if (cls->superclass) {
            // implicit super(): run base ctor chain field-inits only (done above)
        }
        return instance;
    }

    // ---- statements ----------------------------------------------------------

    Frame& frame() { return frames_.back(); }
    const SourceTree& tree() {
        const ClassRt* cls = find_class(frame().class_name);
        if (!cls) throw Unsupported("lost class context");
        return *cls->tree;
    }
    std::string text_of(TSNode node) { return std::string(tree().text(node)); }

    void tick() {
        if (++steps_ > 20'000'000) throw Unsupported("execution step limit exceeded");
    }

    Flow exec_block(TSNode block) {
        frame().scopes.emplace_back();
        Flow flow;
        uint32_t n = ts_node_named_child_count(block);
        for (uint32_t i = 0; i < n; ++i) {
            flow = exec(ts_node_named_child(block, i));
            if (flow.kind != FlowKind::normal) break;
        }
        frame().scopes.pop_back();
        return flow;
    }

    Flow exec(TSNode node) {
        tick();
        std::string_view kind = ts_node_type(node);
        if (kind == "line_comment" || kind == "block_comment") return {};
        if (kind == "local_variable_declaration") {
            exec_local(node);
            return {};
        }
        if (kind == "expression_statement") {
            TSNode expr = ts_node_named_child(node, 0);
            if (!ts_node_is_null(expr)) eval(expr);
            return {};
        }
        if (kind == "block") return exec_block(node);
        if (kind == "if_statement") {
            if (truthy(eval_condition(node))) return exec_maybe(child_field(node, "consequence"));
            TSNode alternative = child_field(node, "alternative");
            if (!ts_node_is_null(alternative)) return exec_maybe(alternative);
            return {};
        }
        if (kind == "while_statement") {
            while (truthy(eval_condition(node))) {
                tick();
                Flow flow = exec_maybe(child_field(node, "body"));
                if (flow.kind == FlowKind::ret) return flow;
                if (flow.kind == FlowKind::brk) break;
            }
            return {};
        }
        if (kind == "do_statement") {
            do {
                tick();
                Flow flow = exec_maybe(child_field(node, "body"));
                if (flow.kind == FlowKind::ret) return flow;
                if (flow.kind == FlowKind::brk) break;
            } while (truthy(eval_condition(node)));
            return {};
        }
        if (kind == "for_statement") return exec_for(node);
        if (kind == "enhanced_for_statement") return exec_enhanced_for(node);
        if (kind == "return_statement") {
            TSNode value = ts_node_named_child(node, 0);
            Flow flow;
            flow.kind = FlowKind::ret;
            if (!ts_node_is_null(value)) flow.value = eval(value);
            return flow;
        }
        if (kind == "break_statement") return {FlowKind::brk, {}};
        if (kind == "continue_statement") return {FlowKind::cont, {}};
        if (kind == "throw_statement") {
            TSNode value = ts_node_named_child(node, 0);
            throw_value(eval(value));
        }
        if (kind == "try_statement") return exec_try(node);
        if (kind == "switch_expression" || kind == "switch_statement")
            return exec_switch(node);
        if (kind == "assert_statement") {
            TSNode condition = ts_node_named_child(node, 0);
            if (!ts_node_is_null(condition) && !truthy(eval(condition)))
                throw JavaThrow{"AssertionError", ""};
            return {};
        }
        if (kind == "labeled_statement") {
            uint32_t n = ts_node_named_child_count(node);
            if (n > 0) return exec_maybe(ts_node_named_child(node, n - 1));
            return {};
        }
        if (kind == "local_class_declaration" || kind == "synchronized_statement" ||
            kind == "yield_statement")
            throw Unsupported(std::string("unsupported statement: ") + std::string(kind));
        // empty statement and anything else without runtime effect
        return {};
    }

    Flow exec_maybe(TSNode node) {
        if (ts_node_is_null(node)) return {};
        return exec(node);
    }

    void exec_local(TSNode node) {
        std::string type = clean_type(tree(), child_field(node, "type"));
        uint32_t n = ts_node_named_child_count(node);
        for (uint32_t i = 0; i < n; ++i) {
            TSNode declarator = ts_node_named_child(node, i);
            if (!is_type(declarator, "variable_declarator")) continue;
            TSNode name = child_field(declarator, "name");
            if (ts_node_is_null(name)) continue;
            TSNode value = child_field(declarator, "value");
            Value v = ts_node_is_null(value) ? default_value(type) : eval(value);
            frame().scopes.back()[text_of(name)] = {coerce(std::move(v), type), type};
        }
    }

    Flow exec_for(TSNode node) {
        frame().scopes.emplace_back();
        TSNode init = child_field(node, "init");
        if (!ts_node_is_null(init)) {
            if (is_type(init, "local_variable_declaration"))
                exec_local(init);
            else
                for (TSNode expr : field_children(node, "init")) eval(expr);
        }
        Flow out;
        while (true) {
            tick();
            TSNode condition = child_field(node, "condition");
            if (!ts_node_is_null(condition) && !truthy(eval(condition))) break;
            Flow flow = exec_maybe(child_field(node, "body"));
            if (flow.kind == FlowKind::ret) {
                out = flow;
                break;
            }
            if (flow.kind == FlowKind::brk) break;
            for (TSNode update : field_children(node, "update")) eval(update);
        }
        frame().scopes.pop_back();
        return out;
    }

    std::vector<TSNode> field_children(TSNode node, const char* field) {
        std::vector<TSNode> out;
        uint32_t n = ts_node_child_count(node);
        for (uint32_t i = 0; i < n; ++i) {
            const char* name = ts_node_field_name_for_child(node, i);
            if (name && strcmp(name, field) == 0) out.push_back(ts_node_child(node, i));
        }
        return out;
    }

    Flow exec_enhanced_for(TSNode node) {
        Value iterable = eval(child_field(node, "value"));
        if (!std::holds_alternative<std::shared_ptr<ArrayVal>>(iterable))
            throw Unsupported("enhanced for over non-array value");
        auto arr = std::get<std::shared_ptr<ArrayVal>>(iterable);
        if (!arr) throw JavaThrow{"NullPointerException", ""};
        std::string type = clean_type(tree(), child_field(node, "type"));
        std::string name = text_of(child_field(node, "name"));
        Flow out;
        for (const Value& item : arr->items) {
            tick();
            frame().scopes.emplace_back();
            frame().scopes.back()[name] = {coerce(item, type), type};
            Flow flow = exec_maybe(child_field(node, "body"));
            frame().scopes.pop_back();
            if (flow.kind == FlowKind::ret) {
                out = flow;
                break;
            }
            if (flow.kind == FlowKind::brk) break;
        }
        return out;
    }

    Flow exec_try(TSNode node) {
        Flow flow;
        bool thrown = false;
        JavaThrow pending{"", ""};
        try {
            flow = exec_maybe(child_field(node, "body"));
        } catch (const JavaThrow& e) {
            thrown = true;
            pending = e;
        }
        if (thrown) {
            uint32_t n = ts_node_named_child_count(node);
            for (uint32_t i = 0; i < n && thrown; ++i) {
                TSNode clause = ts_node_named_child(node, i);
                if (!is_type(clause, "catch_clause")) continue;
                TSNode param = ts_node_named_child(clause, 0);
                if (!is_type(param, "catch_formal_parameter")) continue;
                std::vector<std::string> catch_types;
                uint32_t m = ts_node_named_child_count(param);
                std::string var_name;
                for (uint32_t j = 0; j < m; ++j) {
                    TSNode child = ts_node_named_child(param, j);
                    if (is_type(child, "identifier"))
                        var_name = text_of(child);
                    else if (is_type(child, "catch_type")) {
                        uint32_t k = ts_node_named_child_count(child);
                        for (uint32_t t = 0; t < k; ++t)
                            catch_types.push_back(
                                clean_type(tree(), ts_node_named_child(child, t)));
                    }
                }
                bool matches = false;
                for (const auto& ct : catch_types)
                    if (extends(pending.type, ct)) matches = true;
                if (!matches) continue;
                thrown = false;
                auto exception = std::make_shared<Instance>();
                exception->class_name = pending.type;
                exception->fields["message"] =
                    pending.message.empty() ? Value{std::monostate{}}
                                            : Value{pending.message};
                frame().scopes.emplace_back();
                frame().scopes.back()[var_name] = {exception, pending.type};
                try {
                    flow = exec_maybe(child_field(clause, "body"));
                } catch (...) {
                    frame().scopes.pop_back();
                    run_finally(node);
                    throw;
                }
                frame().scopes.pop_back();
            }
        }
        run_finally(node);
        if (thrown) throw pending;
        return flow;
    }

    void run_finally(TSNode node) {
        uint32_t n = ts_node_named_child_count(node);
        for (uint32_t i = 0; i < n; ++i) {
            TSNode clause = ts_node_named_child(node, i);
            if (!is_type(clause, "finally_clause")) continue;
            uint32_t m = ts_node_named_child_count(clause);
            for (uint32_t j = 0; j < m; ++j) exec_maybe(ts_node_named_child(clause, j));
        }
    }

    Flow exec_switch(TSNode node) {
        Value subject = eval_condition(node);
        TSNode body = child_field(node, "body");
        if (ts_node_is_null(body)) return {};
        uint32_t n = ts_node_named_child_count(body);
        // locate the matching group, then fall through until break
        int start = -1, default_start = -1;
        for (uint32_t i = 0; i < n; ++i) {
            TSNode group = ts_node_named_child(body, i);
            if (is_type(group, "switch_rule"))
                throw Unsupported("arrow switch rules are not supported");
            if (!is_type(group, "switch_block_statement_group")) continue;
            uint32_t m = ts_node_named_child_count(group);
            for (uint32_t j = 0; j < m; ++j) {
                TSNode item = ts_node_named_child(group, j);
                if (!is_type(item, "switch_label")) continue;
                if (ts_node_named_child_count(item) == 0) {
                    if (default_start < 0) default_start = static_cast<int>(i);
                } else if (start < 0) {
                    Value label = eval(ts_node_named_child(item, 0));
                    if (values_equal(subject, label)) start = static_cast<int>(i);
                }
            }
        }
        if (start < 0) start = default_start;
        if (start < 0) return {};
        for (uint32_t i = static_cast<uint32_t>(start); i < n; ++i) {
            TSNode group = ts_node_named_child(body, i);
            if (!is_type(group, "switch_block_statement_group")) continue;
            uint32_t m = ts_node_named_child_count(group);
            for (uint32_t j = 0; j < m; ++j) {
                TSNode item = ts_node_named_child(group, j);
                if (is_type(item, "switch_label")) continue;
                Flow flow = exec(item);
                if (flow.kind == FlowKind::brk) return {};
                if (flow.kind != FlowKind::normal) return flow;
            }
        }
        return {};
    }

    Value eval_condition(TSNode node) {
        TSNode condition = child_field(node, "condition");
        if (ts_node_is_null(condition)) return true;
        if (is_type(condition, "parenthesized_expression")) {
            TSNode inner = ts_node_named_child(condition, 0);
            return eval(inner);
        }
        return eval(condition);
    }

    [[noreturn]] void throw_value(const Value& v) {
        if (std::holds_alternative<std::shared_ptr<Instance>>(v)) {
            auto obj = std::get<std::shared_ptr<Instance>>(v);
            if (!obj) throw JavaThrow{"NullPointerException", ""};
            std::string message;
            auto it = obj->fields.find("message");
            if (it != obj->fields.end() && !is_null(it->second))
                message = to_java_string(it->second);
            throw JavaThrow{obj->class_name, message};
        }
        if (is_null(v)) throw JavaThrow{"NullPointerException", ""};
        throw Unsupported("throw of a non-exception value");
    }

    // ---- expressions ----------------------------------------------------------

    bool truthy(const Value& v) {
        if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
        throw Unsupported("condition did not evaluate to a boolean");
    }

    double as_double(const Value& v) {
        if (std::holds_alternative<int64_t>(v))
            return static_cast<double>(std::get<int64_t>(v));
        if (std::holds_alternative<double>(v)) return std::get<double>(v);
        if (std::holds_alternative<CharVal>(v))
            return static_cast<double>(std::get<CharVal>(v).c);
        throw Unsupported("numeric operand expected");
    }

    int64_t as_long(const Value& v) {
        if (std::holds_alternative<int64_t>(v)) return std::get<int64_t>(v);
        if (std::holds_alternative<CharVal>(v))
            return static_cast<int64_t>(std::get<CharVal>(v).c);
        throw Unsupported("integral operand expected");
    }

    bool integral(const Value& v) {
        return std::holds_alternative<int64_t>(v) || std::holds_alternative<CharVal>(v);
    }

    std::string java_double_to_string(double d) {
        if (std::isnan(d)) return "NaN";
        if (std::isinf(d)) return d > 0 ? "Infinity" : "-Infinity";
        std::string out = fmt::format("{}", d);
        if (out.find('.') == std::string::npos && out.find('e') == std::string::npos &&
            out.find('E') == std::string::npos && out.find("inf") == std::string::npos &&
            out.find("nan") == std::string::npos)
            out += ".0";
        return out;
    }

    std::string to_java_string(const Value& v) {
        if (is_null(v)) return "null";
        if (std::holds_alternative<int64_t>(v))
            return std::to_string(std::get<int64_t>(v));
        if (std::holds_alternative<double>(v))
            return java_double_to_string(std::get<double>(v));
        if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
        if (std::holds_alternative<CharVal>(v)) {
            char32_t c = std::get<CharVal>(v).c;
            if (c < 0x80) return std::string(1, static_cast<char>(c));
            return "?";
        }
        if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
        if (std::holds_alternative<std::shared_ptr<ArrayVal>>(v)) return "<array>";
        auto obj = std::get<std::shared_ptr<Instance>>(v);
        if (!obj) return "null";
        if (obj->class_name == "StringBuilder") {
            auto it = obj->fields.find("#sb");
            return it == obj->fields.end() ? "" : to_java_string(it->second);
        }
        if (const ClassRt* cls = find_class(obj->class_name)) {
            if (const MethodRt* m = select_method(*cls, "toString", {}, false)) {
                Value s = call_method(obj->class_name, *m, {}, obj);
                return to_java_string(s);
            }
        }
        auto it = obj->fields.find("message");
        if (it != obj->fields.end()) {
            if (is_null(it->second)) return obj->class_name;
            return obj->class_name + ": " + to_java_string(it->second);
        }
        return obj->class_name + "@0";
    }

    bool values_equal(const Value& a, const Value& b) {
        if (integral(a) && integral(b)) return as_long(a) == as_long(b);
        if ((integral(a) || std::holds_alternative<double>(a)) &&
            (integral(b) || std::holds_alternative<double>(b)))
            return as_double(a) == as_double(b);
        if (std::holds_alternative<bool>(a) && std::holds_alternative<bool>(b))
            return std::get<bool>(a) == std::get<bool>(b);
        if (std::holds_alternative<std::string>(a) &&
            std::holds_alternative<std::string>(b))
            return std::get<std::string>(a) == std::get<std::string>(b);
        if (is_null(a) || is_null(b)) return is_null(a) && is_null(b);
        if (std::holds_alternative<std::shared_ptr<Instance>>(a) &&
            std::holds_alternative<std::shared_ptr<Instance>>(b))
            return std::get<std::shared_ptr<Instance>>(a) ==
                   std::get<std::shared_ptr<Instance>>(b);
        if (std::holds_alternative<std::shared_ptr<ArrayVal>>(a) &&
            std::holds_alternative<std::shared_ptr<ArrayVal>>(b))
            return std::get<std::shared_ptr<ArrayVal>>(a) ==
                   std::get<std::shared_ptr<ArrayVal>>(b);
        return false;
    }

    Value eval(TSNode node) {
        tick();
        if (ts_node_is_null(node)) return std::monostate{};
        std::string_view kind = ts_node_type(node);

        if (kind == "decimal_integer_literal" || kind == "hex_integer_literal" ||
            kind == "octal_integer_literal" || kind == "binary_integer_literal")
            return parse_integer(text_of(node));
        if (kind == "decimal_floating_point_literal") {
            std::string text = text_of(node);
            while (!text.empty() && (text.back() == 'd' || text.back() == 'D' ||
                                     text.back() == 'f' || text.back() == 'F'))
                text.pop_back();
            return std::stod(text);
        }
        if (kind == "string_literal") return unescape(text_of(node));
        if (kind == "character_literal") {
            std::string content = unescape(text_of(node));
            return CharVal{content.empty()
                               ? char32_t{0}
                               : static_cast<char32_t>(
                                     static_cast<unsigned char>(content[0]))};
        }
        if (kind == "true") return true;
        if (kind == "false") return false;
        if (kind == "null_literal") return std::monostate{};
        if (kind == "this") {
            if (!frame().self) throw Unsupported("this outside instance context");
            return frame().self;
        }
        if (kind == "identifier") return eval_identifier(node);
        if (kind == "parenthesized_expression")
            return eval(ts_node_named_child(node, 0));
        if (kind == "binary_expression") return eval_binary(node);
        if (kind == "unary_expression") return eval_unary(node);
        if (kind == "update_expression") return eval_update(node);
        if (kind == "assignment_expression") return eval_assignment(node);
        if (kind == "ternary_expression")
            return truthy(eval(child_field(node, "condition")))
                       ? eval(child_field(node, "consequence"))
                       : eval(child_field(node, "alternative"));
        if (kind == "method_invocation") return eval_invocation(node);
        if (kind == "field_access") return eval_field_access(node);
        if (kind == "array_access") return eval_array_access(node);
        if (kind == "object_creation_expression") return eval_new(node);
        if (kind == "array_creation_expression") return eval_new_array(node);
        if (kind == "array_initializer") {
            auto arr = std::make_shared<ArrayVal>();
            arr->elem_type = "?";
            uint32_t n = ts_node_named_child_count(node);
            for (uint32_t i = 0; i < n; ++i)
                arr->items.push_back(eval(ts_node_named_child(node, i)));
            return arr;
        }
        if (kind == "cast_expression") return eval_cast(node);
        if (kind == "instanceof_expression") {
            Value left = eval(child_field(node, "left"));
            std::string target = clean_type(tree(), child_field(node, "right"));
            if (std::holds_alternative<std::shared_ptr<Instance>>(left)) {
                auto obj = std::get<std::shared_ptr<Instance>>(left);
                return obj && extends(obj->class_name, target);
            }
            if (std::holds_alternative<std::string>(left))
                return target == "String" || target == "Object" ||
                       target == "CharSequence";
            return false;
        }
        if (kind == "lambda_expression" || kind == "method_reference")
            throw Unsupported(std::string("unsupported expression: ") +
                              std::string(kind));
        if (kind == "switch_expression")
            throw Unsupported("switch used as an expression");
        throw Unsupported(std::string("unsupported expression: ") + std::string(kind));
    }

    Value parse_integer(std::string text) {
        bool is_long = false;
        if (!text.empty() && (text.back() == 'l' || text.back() == 'L')) {
            is_long = true;
            text.pop_back();
        }
        (void)is_long;
        std::string digits;
        for (char c : text)
            if (c != '_') digits += c;
        int base = 10;
        size_t start = 0;
        if (digits.size() > 2 && digits[0] == '0' &&
            (digits[1] == 'x' || digits[1] == 'X')) {
            base = 16;
            start = 2;
        } else if (digits.size() > 2 && digits[0] == '0' &&
                   (digits[1] == 'b' || digits[1] == 'B')) {
            base = 2;
            start = 2;
        } else if (digits.size() > 1 && digits[0] == '0') {
            base = 8;
            start = 1;
        }
        return static_cast<int64_t>(
            std::stoll(digits.substr(start), nullptr, base));
    }

    std::string unescape(const std::string& quoted) {
        std::string out;
        size_t begin = quoted.find_first_of("\"'");
        size_t end = quoted.find_last_of("\"'");
        if (begin == std::string::npos || end <= begin) return quoted;
        for (size_t i = begin + 1; i < end; ++i) {
            char c = quoted[i];
            if (c != '\\' || i + 1 >= end) {
                out += c;
                continue;
            }
            char esc = quoted[++i];
            switch (esc) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case 'b': out += '\b'; break;
            case 'f': out += '\f'; break;
            case '0': out += '\0'; break;
            case '\\': out += '\\'; break;
            case '\'': out += '\''; break;
            case '"': out += '"'; break;
            case 'u': {
                if (i + 4 < end) {
                    unsigned code = std::stoul(quoted.substr(i + 1, 4), nullptr, 16);
                    if (code < 0x80) out += static_cast<char>(code);
                    else out += '?';
                    i += 4;
                }
                break;
            }
            default: out += esc; break;
            }
        }
        return out;
    }

    // identifier resolution: locals, then instance fields, then statics up the chain
    Value* find_local(const std::string& name, std::string* type_out = nullptr) {
        for (auto it = frame().scopes.rbegin(); it != frame().scopes.rend(); ++it) {
            auto found = it->find(name);
            if (found != it->end()) {
                if (type_out) *type_out = found->second.type;
                return &found->second.value;
            }
        }
        return nullptr;
    }

    struct Place {
        enum Kind { none, local, instance_field, static_field, array_slot } kind = none;
        Value* slot = nullptr;
        std::string type;
        std::shared_ptr<Instance> owner;
        std::shared_ptr<ArrayVal> array;
        size_t index = 0;
        std::string field_name;
    };

    Place resolve_place(TSNode node) {
        std::string_view kind = ts_node_type(node);
        Place place;
        if (kind == "identifier") {
            std::string name = text_of(node);
            std::string type;
            if (Value* local = find_local(name, &type)) {
                place.kind = Place::local;
                place.slot = local;
                place.type = type;
                return place;
            }
            if (frame().self) {
                auto it = frame().self->fields.find(name);
                if (it != frame().self->fields.end()) {
                    place.kind = Place::instance_field;
                    place.owner = frame().self;
                    place.field_name = name;
                    place.type = field_type(frame().class_name, name);
                    return place;
                }
            }
            std::string cursor = frame().class_name;
            int guard = 0;
            while (guard++ < 32) {
                const ClassRt* cls = find_class(cursor);
                if (!cls) break;
                ensure_class(cursor);
                auto& slots = statics_[cursor];
                auto it = slots.find(name);
                if (it != slots.end()) {
                    place.kind = Place::static_field;
                    place.slot = &it->second;
                    place.type = field_type(cursor, name);
                    return place;
                }
                if (!cls->superclass) break;
                cursor = *cls->superclass;
            }
            throw Unsupported("unresolved variable " + name);
        }
        if (kind == "field_access") {
            TSNode object = child_field(node, "object");
            TSNode field = child_field(node, "field");
            std::string field_name = text_of(field);
            std::string object_text = text_of(object);
            if (const ClassRt* cls = find_class(object_text)) {
                ensure_class(object_text);
                auto& slots = statics_[object_text];
                auto it = slots.find(field_name);
                if (it != slots.end()) {
                    place.kind = Place::static_field;
                    place.slot = &it->second;
                    place.type = field_type(object_text, field_name);
                    return place;
                }
                (void)cls;
                throw Unsupported("unresolved static field " + object_text + "." +
                                  field_name);
            }
            Value base = eval(object);
            if (!std::holds_alternative<std::shared_ptr<Instance>>(base))
                throw Unsupported("field assignment on non-object value");
            auto obj = std::get<std::shared_ptr<Instance>>(base);
            if (!obj) throw JavaThrow{"NullPointerException", ""};
            place.kind = Place::instance_field;
            place.owner = obj;
            place.field_name = field_name;
            place.type = field_type(obj->class_name, field_name);
            return place;
        }
        if (kind == "array_access") {
            Value base = eval(child_field(node, "array"));
            if (!std::holds_alternative<std::shared_ptr<ArrayVal>>(base))
                throw Unsupported("array assignment on non-array value");
            auto arr = std::get<std::shared_ptr<ArrayVal>>(base);
            if (!arr) throw JavaThrow{"NullPointerException", ""};
            int64_t index = as_long(eval(child_field(node, "index")));
            if (index < 0 || static_cast<size_t>(index) >= arr->items.size())
                throw JavaThrow{"ArrayIndexOutOfBoundsException",
                                fmt::format("Index {} out of bounds for length {}",
                                            index, arr->items.size())};
            place.kind = Place::array_slot;
            place.array = arr;
            place.index = static_cast<size_t>(index);
            place.type = arr->elem_type;
            return place;
        }
        throw Unsupported(std::string("unsupported assignment target: ") +
                          std::string(kind));
    }

    std::string field_type(const std::string& class_name, const std::string& field) {
        std::string cursor = class_name;
        int guard = 0;
        while (guard++ < 32) {
            const ClassRt* cls = find_class(cursor);
            if (!cls) return "?";
            for (const auto& f : cls->fields)
                if (f.name == field) return f.type;
            if (!cls->superclass) return "?";
            cursor = *cls->superclass;
        }
        return "?";
    }

    Value read_place(const Place& place) {
        switch (place.kind) {
        case Place::local:
        case Place::static_field: return *place.slot;
        case Place::instance_field: return place.owner->fields.at(place.field_name);
        case Place::array_slot: return place.array->items[place.index];
        default: throw Unsupported("read from unresolved place");
        }
    }

    void write_place(const Place& place, Value v) {
        Value coerced = coerce(std::move(v), place.type);
        switch (place.kind) {
        case Place::local:
        case Place::static_field: *place.slot = std::move(coerced); break;
        case Place::instance_field:
            place.owner->fields[place.field_name] = std::move(coerced);
            break;
        case Place::array_slot: place.array->items[place.index] = std::move(coerced); break;
        default: throw Unsupported("write to unresolved place");
        }
    }

    Value eval_identifier(TSNode node) {
        std::string name = text_of(node);
        if (Value* local = find_local(name)) return *local;
        if (frame().self) {
            auto it = frame().self->fields.find(name);
            if (it != frame().self->fields.end()) return it->second;
        }
        std::string cursor = frame().class_name;
        int guard = 0;
        while (guard++ < 32) {
            const ClassRt* cls = find_class(cursor);
            if (!cls) break;
            ensure_class(cursor);
            auto& slots = statics_[cursor];
            auto it = slots.find(name);
            if (it != slots.end()) return it->second;
            if (!cls->superclass) break;
            cursor = *cls->superclass;
        }
        throw Unsupported("unresolved identifier " + name);
    }

    std::string binary_operator(TSNode node) {
        TSNode op = child_field(node, "operator");
        if (!ts_node_is_null(op)) return text_of(op);
        uint32_t n = ts_node_child_count(node);
        for (uint32_t i = 0; i < n; ++i) {
            TSNode child = ts_node_child(node, i);
            if (!ts_node_is_named(child)) return text_of(child);
        }
        return "";
    }

    Value eval_binary(TSNode node) {
        std::string op = binary_operator(node);
        TSNode left_node = child_field(node, "left");
        TSNode right_node = child_field(node, "right");

        if (op == "&&") {
            if (!truthy(eval(left_node))) return false;
            return truthy(eval(right_node));
        }
        if (op == "||") {
            if (truthy(eval(left_node))) return true;
            return truthy(eval(right_node));
        }

        Value left = eval(left_node);
        Value right = eval(right_node);
        return apply_binary(op, left, right);
    }

    Value apply_binary(const std::string& op, const Value& left, const Value& right) {
        if (op == "+") {
            if (std::holds_alternative<std::string>(left) ||
                std::holds_alternative<std::string>(right))
                return to_java_string(left) + to_java_string(right);
        }
        if (op == "==" || op == "!=") {
            bool equal = values_equal(left, right);
            return op == "==" ? equal : !equal;
        }
        if (op == "<" || op == ">" || op == "<=" || op == ">=") {
            if (std::holds_alternative<std::string>(left) ||
                std::holds_alternative<std::string>(right))
                throw Unsupported("relational operator on strings");
            double a = as_double(left);
            double b = as_double(right);
            if (op == "<") return a < b;
            if (op == ">") return a > b;
            if (op == "<=") return a <= b;
            return a >= b;
        }
        if (op == "&" || op == "|" || op == "^") {
            if (std::holds_alternative<bool>(left) &&
                std::holds_alternative<bool>(right)) {
                bool a = std::get<bool>(left);
                bool b = std::get<bool>(right);
                if (op == "&") return a && b;
                if (op == "|") return a || b;
                return a != b;
            }
            int64_t a = as_long(left);
            int64_t b = as_long(right);
            if (op == "&") return a & b;
            if (op == "|") return a | b;
            return a ^ b;
        }
        if (op == "<<" || op == ">>" || op == ">>>") {
            int64_t a = as_long(left);
            int64_t shift = as_long(right) & 63;
            if (op == "<<") return static_cast<int64_t>(static_cast<uint64_t>(a) << shift);
            if (op == ">>") return a >> shift;
            return static_cast<int64_t>(static_cast<uint64_t>(a) >> shift);
        }
        if (op == "+" || op == "-" || op == "*" || op == "/" || op == "%") {
            if (integral(left) && integral(right)) {
                int64_t a = as_long(left);
                int64_t b = as_long(right);
                if (op == "+") return a + b;
                if (op == "-") return a - b;
                if (op == "*") return a * b;
                if (b == 0) throw JavaThrow{"ArithmeticException", "/ by zero"};
                if (op == "/") return a / b;
                return a % b;
            }
            double a = as_double(left);
            double b = as_double(right);
            if (op == "+") return a + b;
            if (op == "-") return a - b;
            if (op == "*") return a * b;
            if (op == "/") return a / b;
            return std::fmod(a, b);
        }
        throw Unsupported("unsupported binary operator " + op);
    }

    Value eval_unary(TSNode node) {
        TSNode operand = child_field(node, "operand");
        std::string op;
        uint32_t n = ts_node_child_count(node);
        for (uint32_t i = 0; i < n; ++i) {
            TSNode child = ts_node_child(node, i);
            if (!ts_node_is_named(child)) {
                op = text_of(child);
                break;
            }
        }
        Value v = eval(operand);
        if (op == "!") return !truthy(v);
        if (op == "-") {
            if (integral(v)) return -as_long(v);
            return -as_double(v);
        }
        if (op == "+") return v;
        if (op == "~") return ~as_long(v);
        throw Unsupported("unsupported unary operator " + op);
    }

    Value eval_update(TSNode node) {
        bool prefix = false;
        std::string op;
        TSNode target{};
        uint32_t n = ts_node_child_count(node);
        for (uint32_t i = 0; i < n; ++i) {
            TSNode child = ts_node_child(node, i);
            if (!ts_node_is_named(child)) {
                op = text_of(child);
                if (i == 0) prefix = true;
            } else {
                target = child;
            }
        }
        Place place = resolve_place(target);
        Value old_value = read_place(place);
        int64_t delta = op == "++" ? 1 : -1;
        Value new_value;
        if (std::holds_alternative<double>(old_value))
            new_value = std::get<double>(old_value) + static_cast<double>(delta);
        else
            new_value = as_long(old_value) + delta;
        write_place(place, new_value);
        return prefix ? new_value : old_value;
    }

    Value eval_assignment(TSNode node) {
        TSNode left = child_field(node, "left");
        TSNode right = child_field(node, "right");
        std::string op = binary_operator(node);
        Place place = resolve_place(left);
        Value value = eval(right);
        if (op != "=") {
            Value current = read_place(place);
            value = apply_binary(op.substr(0, op.size() - 1), current, value);
        }
        write_place(place, value);
        return read_place(place);
    }

    Value eval_field_access(TSNode node) {
        TSNode object = child_field(node, "object");
        TSNode field = child_field(node, "field");
        std::string field_name = text_of(field);
        std::string object_text = text_of(object);

        if (object_text == "System" && field_name == "out") return std::string("#out");
        if (is_type(object, "this")) {
            if (!frame().self) throw Unsupported("this outside instance context");
            auto it = frame().self->fields.find(field_name);
            if (it != frame().self->fields.end()) return it->second;
            throw Unsupported("unresolved field this." + field_name);
        }
        if (find_local(object_text) == nullptr && find_class(object_text)) {
            ensure_class(object_text);
            auto& slots = statics_[object_text];
            auto it = slots.find(field_name);
            if (it != slots.end()) return it->second;
            throw Unsupported("unresolved static field " + object_text + "." +
                              field_name);
        }
        Value base = eval(object);
        if (std::holds_alternative<std::shared_ptr<ArrayVal>>(base)) {
            auto arr = std::get<std::shared_ptr<ArrayVal>>(base);
            if (!arr) throw JavaThrow{"NullPointerException", ""};
            if (field_name == "length") return static_cast<int64_t>(arr->items.size());
        }
        if (std::holds_alternative<std::string>(base) && field_name == "length")
            throw Unsupported("String.length is a method, not a field");
        if (std::holds_alternative<std::shared_ptr<Instance>>(base)) {
            auto obj = std::get<std::shared_ptr<Instance>>(base);
            if (!obj) throw JavaThrow{"NullPointerException", ""};
            auto it = obj->fields.find(field_name);
            if (it != obj->fields.end()) return it->second;
        }
        throw Unsupported("unresolved field access ." + field_name);
    }

    Value eval_array_access(TSNode node) {
        Value base = eval(child_field(node, "array"));
        if (!std::holds_alternative<std::shared_ptr<ArrayVal>>(base))
            throw Unsupported("array access on non-array value");
        auto arr = std::get<std::shared_ptr<ArrayVal>>(base);
        if (!arr) throw JavaThrow{"NullPointerException", ""};
        int64_t index = as_long(eval(child_field(node, "index")));
        if (index < 0 || static_cast<size_t>(index) >= arr->items.size())
            throw JavaThrow{"ArrayIndexOutOfBoundsException",
                            fmt::format("Index {} out of bounds for length {}", index,
                                        arr->items.size())};
        return arr->items[static_cast<size_t>(index)];
    }

    Value eval_new(TSNode node) {
        std::string type = clean_type(tree(), child_field(node, "type"));
        std::string bare = type.substr(0, type.find('<'));
        std::vector<Value> args = eval_arguments(node);

        if (bare == "StringBuilder") {
            auto obj = std::make_shared<Instance>();
            obj->class_name = "StringBuilder";
            obj->fields["#sb"] =
                args.empty() ? std::string() : to_java_string(args[0]);
            return obj;
        }
        if (kExceptionParents.count(bare) || bare == "Throwable" || bare == "Object") {
            auto obj = std::make_shared<Instance>();
            obj->class_name = bare;
            obj->fields["message"] =
                args.empty() ? Value{std::monostate{}} : Value{to_java_string(args[0])};
            return obj;
        }
        if (find_class(bare)) return instantiate(bare, std::move(args));
        throw Unsupported("cannot instantiate unknown class " + bare);
    }

    Value eval_new_array(TSNode node) {
        std::string elem = clean_type(tree(), child_field(node, "type"));
        auto arr = std::make_shared<ArrayVal>();
        arr->elem_type = elem;
        TSNode value = child_field(node, "value");
        if (!ts_node_is_null(value)) {
            uint32_t n = ts_node_named_child_count(value);
            for (uint32_t i = 0; i < n; ++i)
                arr->items.push_back(coerce(eval(ts_node_named_child(value, i)), elem));
            return arr;
        }
        // dimensions_expr children give the sizes; support one dimension
        std::vector<TSNode> dims = field_children(node, "dimensions");
        int64_t size = 0;
        bool sized = false;
        uint32_t n = ts_node_named_child_count(node);
        for (uint32_t i = 0; i < n && !sized; ++i) {
            TSNode child = ts_node_named_child(node, i);
            if (is_type(child, "dimensions_expr")) {
                TSNode expr = ts_node_named_child(child, 0);
                if (!ts_node_is_null(expr)) {
                    size = as_long(eval(expr));
                    sized = true;
                }
            }
        }
        if (!sized) return arr;
        if (size < 0) throw JavaThrow{"NegativeArraySizeException", std::to_string(size)};
        arr->items.assign(static_cast<size_t>(size), default_value(elem));
        return arr;
    }

    Value eval_cast(TSNode node) {
        std::string type = clean_type(tree(), child_field(node, "type"));
        Value v = eval(child_field(node, "value"));
        if (type == "int" || type == "short" || type == "byte") {
            if (std::holds_alternative<double>(v))
                return static_cast<int64_t>(std::get<double>(v));
            return as_long(v);
        }
        if (type == "long") {
            if (std::holds_alternative<double>(v))
                return static_cast<int64_t>(std::get<double>(v));
            return as_long(v);
        }
        if (type == "double" || type == "float") return as_double(v);
        if (type == "char") return CharVal{static_cast<char32_t>(as_long(v))};
        if (type == "String") {
            if (is_null(v) || std::holds_alternative<std::string>(v)) return v;
            throw JavaThrow{"ClassCastException", "cannot cast to String"};
        }
        if (std::holds_alternative<std::shared_ptr<Instance>>(v)) {
            auto obj = std::get<std::shared_ptr<Instance>>(v);
            if (obj && !extends(obj->class_name, type))
                throw JavaThrow{"ClassCastException",
                                obj->class_name + " cannot be cast to " + type};
        }
        return v;
    }

    std::vector<Value> eval_arguments(TSNode node) {
        std::vector<Value> args;
        TSNode list = child_field(node, "arguments");
        if (ts_node_is_null(list)) return args;
        uint32_t n = ts_node_named_child_count(list);
        for (uint32_t i = 0; i < n; ++i) args.push_back(eval(ts_node_named_child(list, i)));
        return args;
    }

    Value eval_invocation(TSNode node) {
        TSNode object = child_field(node, "object");
        TSNode name_node = child_field(node, "name");
        std::string name = text_of(name_node);

        // System.out.println and friends
        if (!ts_node_is_null(object) && text_of(object) == "System.out") {
            std::vector<Value> args = eval_arguments(node);
            if (name == "println") {
                stdout_ += args.empty() ? "" : to_java_string(args[0]);
                stdout_ += '\n';
                return std::monostate{};
            }
            if (name == "print") {
                if (!args.empty()) stdout_ += to_java_string(args[0]);
                return std::monostate{};
            }
            throw Unsupported("unsupported System.out method " + name);
        }

        std::vector<Value> args = eval_arguments(node);

        if (ts_node_is_null(object)) {
            // unqualified: current class chain, instance dispatch if this is bound
            std::string cursor = frame().class_name;
            const ClassRt* cls = find_class(cursor);
            if (cls) {
                if (const MethodRt* method = select_method(*cls, name, args, false)) {
                    if (method->is_static)
                        return call_static(owner_of(*cls, *method), *method,
                                           std::move(args));
                    if (!frame().self)
                        throw Unsupported("instance method " + name +
                                          " called from static context");
                    return call_method(frame().self->class_name, *method,
                                       std::move(args), frame().self);
                }
            }
            throw Unsupported("unresolved method " + name);
        }

        std::string object_text = text_of(object);
        // static call on a known class name (not shadowed by a local)
        if (find_local(object_text) == nullptr) {
            if (const ClassRt* cls = find_class(object_text)) {
                if (const MethodRt* method = select_method(*cls, name, args, false)) {
                    if (!method->is_static)
                        throw Unsupported("instance method " + name +
                                          " called statically");
                    return call_static(owner_of(*cls, *method), *method,
                                       std::move(args));
                }
                throw Unsupported("unresolved method " + object_text + "." + name);
            }
            if (object_text == "Math" || object_text == "Integer" ||
                object_text == "Long" || object_text == "Double" ||
                object_text == "Boolean" || object_text == "String" ||
                object_text == "Objects" || object_text == "Character" ||
                object_text == "System")
                return builtin_static(object_text, name, args);
        }

        Value base = eval(object);
        return invoke_on_value(base, name, std::move(args));
    }

    // find which class in the chain actually declares the method (for statics)
    std::string owner_of(const ClassRt& cls, const MethodRt& method) {
        const ClassRt* cursor = &cls;
        int guard = 0;
        while (cursor && guard++ < 32) {
            for (const auto& m : cursor->methods)
                if (&m == &method) return cursor->name;
            cursor = cursor->superclass ? find_class(*cursor->superclass) : nullptr;
        }
        return cls.name;
    }

    Value invoke_on_value(const Value& base, const std::string& name,
                          std::vector<Value> args) {
        if (is_null(base)) throw JavaThrow{"NullPointerException", ""};
        if (std::holds_alternative<std::string>(base))
            return string_method(std::get<std::string>(base), name, args);
        if (std::holds_alternative<std::shared_ptr<Instance>>(base)) {
            auto obj = std::get<std::shared_ptr<Instance>>(base);
            if (!obj) throw JavaThrow{"NullPointerException", ""};
            if (obj->class_name == "StringBuilder")
                return stringbuilder_method(obj, name, args);
            if (const ClassRt* cls = find_class(obj->class_name)) {
                if (const MethodRt* method = select_method(*cls, name, args, false)) {
                    if (method->is_static)
                        return call_static(owner_of(*cls, *method), *method,
                                           std::move(args));
                    return call_method(obj->class_name, *method, std::move(args), obj);
                }
            }
            // builtin exception surface
            if (name == "getMessage") {
                auto it = obj->fields.find("message");
                return it == obj->fields.end() ? Value{std::monostate{}} : it->second;
            }
            if (name == "toString") return to_java_string(base);
            if (name == "equals" && args.size() == 1)
                return values_equal(base, args[0]);
            if (name == "hashCode") return int64_t{0};
            throw Unsupported("unresolved method ." + name + " on " + obj->class_name);
        }
        if (std::holds_alternative<int64_t>(base) ||
            std::holds_alternative<double>(base) ||
            std::holds_alternative<bool>(base)) {
            if (name == "equals" && args.size() == 1)
                return values_equal(base, args[0]);
            if (name == "toString") return to_java_string(base);
        }
        throw Unsupported("unresolved method ." + name);
    }

    Value string_method(const std::string& s, const std::string& name,
                        const std::vector<Value>& args) {
        auto str_arg = [&](size_t i) -> std::string {
            if (i < args.size() && std::holds_alternative<std::string>(args[i]))
                return std::get<std::string>(args[i]);
            if (i < args.size() && std::holds_alternative<CharVal>(args[i]))
                return std::string(
                    1, static_cast<char>(std::get<CharVal>(args[i]).c));
            return "";
        };
        if (name == "length") return static_cast<int64_t>(s.size());
        if (name == "isEmpty") return s.empty();
        if (name == "equals")
            return !args.empty() && std::holds_alternative<std::string>(args[0]) &&
                   std::get<std::string>(args[0]) == s;
        if (name == "equalsIgnoreCase") {
            std::string other = str_arg(0);
            if (other.size() != s.size()) return false;
            for (size_t i = 0; i < s.size(); ++i)
                if (tolower(static_cast<unsigned char>(s[i])) !=
                    tolower(static_cast<unsigned char>(other[i])))
                    return false;
            return true;
        }
        if (name == "contains") return s.find(str_arg(0)) != std::string::npos;
        if (name == "startsWith") return s.rfind(str_arg(0), 0) == 0;
        if (name == "endsWith") {
            std::string suffix = str_arg(0);
            return s.size() >= suffix.size() &&
                   s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
        }
        if (name == "indexOf") {
            size_t at = s.find(str_arg(0));
            return at == std::string::npos ? int64_t{-1} : static_cast<int64_t>(at);
        }
        if (name == "lastIndexOf") {
            size_t at = s.rfind(str_arg(0));
            return at == std::string::npos ? int64_t{-1} : static_cast<int64_t>(at);
        }
        if (name == "charAt") {
            int64_t index = as_long(args.at(0));
            if (index < 0 || static_cast<size_t>(index) >= s.size())
                throw JavaThrow{"StringIndexOutOfBoundsException",
                                fmt::format("index {}, length {}", index, s.size())};
            return CharVal{static_cast<char32_t>(
                static_cast<unsigned char>(s[static_cast<size_t>(index)]))};
        }
        if (name == "substring") {
            int64_t begin = as_long(args.at(0));
            int64_t end = args.size() > 1 ? as_long(args[1])
                                          : static_cast<int64_t>(s.size());
            if (begin < 0 || end > static_cast<int64_t>(s.size()) || begin > end)
                throw JavaThrow{"StringIndexOutOfBoundsException",
                                fmt::format("begin {}, end {}, length {}", begin, end,
                                            s.size())};
            return s.substr(static_cast<size_t>(begin),
                            static_cast<size_t>(end - begin));
        }
        if (name == "trim" || name == "strip") {
            size_t begin = s.find_first_not_of(" \t\r\n");
            if (begin == std::string::npos) return std::string();
            size_t end = s.find_last_not_of(" \t\r\n");
            return s.substr(begin, end - begin + 1);
        }
        if (name == "toUpperCase") {
            std::string out = s;
            for (char& c : out) c = static_cast<char>(toupper(static_cast<unsigned char>(c)));
            return out;
        }
        if (name == "toLowerCase") {
            std::string out = s;
            for (char& c : out) c = static_cast<char>(tolower(static_cast<unsigned char>(c)));
            return out;
        }
        if (name == "concat") return s + str_arg(0);
        if (name == "replace") {
            std::string from = str_arg(0);
            std::string to = str_arg(1);
            if (from.empty()) return s;
            std::string out;
            size_t pos = 0;
            while (true) {
                size_t at = s.find(from, pos);
                if (at == std::string::npos) {
                    out += s.substr(pos);
                    break;
                }
                out += s.substr(pos, at - pos);
                out += to;
                pos = at + from.size();
            }
            return out;
        }
        if (name == "compareTo") {
            int cmp = s.compare(str_arg(0));
            return static_cast<int64_t>(cmp < 0 ? -1 : (cmp > 0 ? 1 : 0));
        }
        if (name == "toString") return s;
        if (name == "hashCode") {
            int32_t h = 0;
            for (char c : s) h = 31 * h + static_cast<unsigned char>(c);
            return static_cast<int64_t>(h);
        }
        if (name == "repeat") {
            int64_t count = as_long(args.at(0));
            std::string out;
            for (int64_t i = 0; i < count; ++i) out += s;
            return out;
        }
        throw Unsupported("unsupported String method " + name);
    }

    Value stringbuilder_method(const std::shared_ptr<Instance>& obj,
                               const std::string& name,
                               const std::vector<Value>& args) {
        std::string& buffer = std::get<std::string>(obj->fields["#sb"]);
        if (name == "append") {
            if (!args.empty()) buffer += to_java_string(args[0]);
            return obj;
        }
        if (name == "toString") return buffer;
        if (name == "length") return static_cast<int64_t>(buffer.size());
        if (name == "reverse") {
            std::reverse(buffer.begin(), buffer.end());
            return obj;
        }
        if (name == "isEmpty") return buffer.empty();
        throw Unsupported("unsupported StringBuilder method " + name);
    }

    Value builtin_static(const std::string& class_name, const std::string& name,
                         const std::vector<Value>& args) {
        auto arg = [&](size_t i) -> const Value& { return args.at(i); };
        if (class_name == "Math") {
            if (name == "abs") {
                if (integral(arg(0))) return std::abs(as_long(arg(0)));
                return std::fabs(as_double(arg(0)));
            }
            if (name == "max") {
                if (integral(arg(0)) && integral(arg(1)))
                    return std::max(as_long(arg(0)), as_long(arg(1)));
                return std::max(as_double(arg(0)), as_double(arg(1)));
            }
            if (name == "min") {
                if (integral(arg(0)) && integral(arg(1)))
                    return std::min(as_long(arg(0)), as_long(arg(1)));
                return std::min(as_double(arg(0)), as_double(arg(1)));
            }
            if (name == "sqrt") return std::sqrt(as_double(arg(0)));
            if (name == "pow") return std::pow(as_double(arg(0)), as_double(arg(1)));
            if (name == "round")
                return static_cast<int64_t>(std::llround(as_double(arg(0))));
            if (name == "floorDiv") {
                int64_t a = as_long(arg(0)), b = as_long(arg(1));
                if (b == 0) throw JavaThrow{"ArithmeticException", "/ by zero"};
                int64_t q = a / b;
                if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
                return q;
            }
            if (name == "floorMod") {
                int64_t a = as_long(arg(0)), b = as_long(arg(1));
                if (b == 0) throw JavaThrow{"ArithmeticException", "/ by zero"};
                int64_t r = a % b;
                if (r != 0 && ((r < 0) != (b < 0))) r += b;
                return r;
            }
        }
        if (class_name == "Integer" || class_name == "Long") {
            if (name == "parseInt" || name == "parseLong") {
                const std::string& text = std::get<std::string>(arg(0));
                try {
                    size_t used = 0;
                    int64_t out = std::stoll(text, &used);
                    if (used != text.size())
                        throw JavaThrow{"NumberFormatException",
                                        "For input string: \"" + text + "\""};
                    return out;
                } catch (const JavaThrow&) {
                    throw;
                } catch (const std::exception&) {
                    throw JavaThrow{"NumberFormatException",
                                    "For input string: \"" + text + "\""};
                }
            }
            if (name == "toString" || name == "valueOf") {
                if (name == "valueOf" && integral(arg(0))) return as_long(arg(0));
                return to_java_string(arg(0));
            }
            if (name == "compare") {
                int64_t a = as_long(arg(0)), b = as_long(arg(1));
                return static_cast<int64_t>(a < b ? -1 : (a > b ? 1 : 0));
            }
            if (name == "max") return std::max(as_long(arg(0)), as_long(arg(1)));
            if (name == "min") return std::min(as_long(arg(0)), as_long(arg(1)));
        }
        if (class_name == "Double") {
            if (name == "parseDouble") {
                const std::string& text = std::get<std::string>(arg(0));
                try {
                    size_t used = 0;
                    double out = std::stod(text, &used);
                    while (used < text.size() &&
                           isspace(static_cast<unsigned char>(text[used])))
                        ++used;
                    if (used != text.size())
                        throw JavaThrow{"NumberFormatException",
                                        "For input string: \"" + text + "\""};
                    return out;
                } catch (const JavaThrow&) {
                    throw;
                } catch (const std::exception&) {
                    throw JavaThrow{"NumberFormatException",
                                    "For input string: \"" + text + "\""};
                }
            }
            if (name == "toString") return to_java_string(arg(0));
            if (name == "compare") {
                double a = as_double(arg(0)), b = as_double(arg(1));
                return static_cast<int64_t>(a < b ? -1 : (a > b ? 1 : 0));
            }
            if (name == "isNaN") return std::isnan(as_double(arg(0)));
        }
        if (class_name == "Boolean") {
            if (name == "parseBoolean") {
                std::string text = std::get<std::string>(arg(0));
                for (char& c : text) c = static_cast<char>(tolower(static_cast<unsigned char>(c)));
                return text == "true";
            }
            if (name == "toString") return to_java_string(arg(0));
        }
        if (class_name == "String") {
            if (name == "valueOf") return to_java_string(arg(0));
        }
        if (class_name == "Objects") {
            if (name == "equals") return values_equal(arg(0), arg(1));
            if (name == "isNull") return is_null(arg(0));
            if (name == "toString") return to_java_string(arg(0));
        }
        if (class_name == "Character") {
            if (name == "isDigit") {
                int64_t c = as_long(arg(0));
                return c >= '0' && c <= '9';
            }
            if (name == "isLetter") {
                int64_t c = as_long(arg(0));
                return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
            }
            if (name == "toString") return to_java_string(arg(0));
        }
        if (class_name == "System" && name == "lineSeparator") return std::string("\n");
        throw Unsupported("unsupported builtin " + class_name + "." + name);
    }
};

} // namespace

TestRunResult run_tests(const std::vector<SourceFile>& files) {
    Interp interp(files);
    if (!interp.load_error().empty()) {
        TestRunResult result;
        TestOutcome outcome;
        outcome.id = "(load)";
        outcome.status = TestStatus::error;
        outcome.detail = interp.load_error();
        result.outcomes.push_back(std::move(outcome));
        return result;
    }
    return interp.run();
}

std::string format_test_output(const TestRunResult& result) {
    std::string out;
    int passed = 0, failed = 0, errors = 0;
    for (const auto& outcome : result.outcomes) {
        const char* word = "PASS";
        if (outcome.status == TestStatus::fail) {
            word = "FAIL";
            ++failed;
        } else if (outcome.status == TestStatus::error) {
            word = "ERROR";
            ++errors;
        } else {
            ++passed;
        }
        std::string detail = outcome.detail;
        for (char& c : detail)
            if (c == '\n' || c == '\r') c = ' ';
        out += fmt::format("TEST {} {}{}{}\n", outcome.id, word,
                           detail.empty() ? "" : " ", detail);
    }
    out += fmt::format("SUMMARY total={} passed={} failed={} errors={}\n",
                       result.outcomes.size(), passed, failed, errors);
    return out;
}

} // namespace javamini
