#include <doctest.h>

#include "reflab/java/patch.hpp"
#include "reflab/support/errors.hpp"

using namespace reflab;
using namespace reflab::java;

namespace {

const char* kFile = R"JAVA(package demo;

public class Calc {
    private int base;

    public Calc(int base) {
        this.base = base;
    }

    int add(int a, int b) {
        return a + b;
    }

    int add(int a) {
        return a + base;
    }

    String label() {
        return "calc";
    }
}
)JAVA";

SourceTree parsed() {
    auto outcome = parse_source(kFile);
    REQUIRE(outcome.ok());
    return std::move(*outcome.tree);
}

} // namespace

TEST_CASE("TargetSpec parses bare names, signatures, and return-type prefixes") {
    CHECK(TargetSpec::parse("add").name == "add");
    CHECK_FALSE(TargetSpec::parse("add").param_count.has_value());

    auto two = TargetSpec::parse("add(int, int)");
    CHECK(two.name == "add");
    CHECK(two.param_count == 2);

    auto open = TargetSpec::parse("List<SrcOp> set(...)");
    CHECK(open.name == "set");
    CHECK_FALSE(open.param_count.has_value());

    auto zero = TargetSpec::parse("label()");
    CHECK(zero.name == "label");
    CHECK(zero.param_count == 0);

    auto generic = TargetSpec::parse("Map<String, List<Integer>> group(List<Integer> xs)");
    CHECK(generic.name == "group");
    CHECK(generic.param_count == 1);
}

TEST_CASE("locate_target resolves by name and arity") {
    auto tree = parsed();
    SUBCASE("unique name") {
        TSNode node = locate_target(tree, TargetKind::method, TargetSpec::parse("label"));
        CHECK(tree.text(node).substr(0, 14) == "String label()");
    }
    SUBCASE("overloads require a signature") {
        CHECK_THROWS_AS(locate_target(tree, TargetKind::method, TargetSpec::parse("add")),
                        AmbiguityError);
        TSNode node = locate_target(tree, TargetKind::method, TargetSpec::parse("add(int)"));
        CHECK(tree.text(node).find("base;") != std::string::npos);
    }
    SUBCASE("missing target") {
        CHECK_THROWS_AS(locate_target(tree, TargetKind::method, TargetSpec::parse("ghost")),
                        TargetMissingError);
    }
    SUBCASE("class targets") {
        TSNode node = locate_target(tree, TargetKind::clazz, TargetSpec::parse("Calc"));
        CHECK(std::string(ts_node_type(node)) == "class_declaration");
    }
    SUBCASE("ambiguity message lists candidates") {
        try {
            locate_target(tree, TargetKind::method, TargetSpec::parse("add"));
            FAIL("expected AmbiguityError");
        } catch (const AmbiguityError& e) {
            std::string message = e.what();
            CHECK(message.find("add/2") != std::string::npos);
            CHECK(message.find("add/1") != std::string::npos);
        }
    }
}

TEST_CASE("apply_patch identity splice is byte-exact") {
    auto tree = parsed();
    TSNode node = locate_target(tree, TargetKind::method, TargetSpec::parse("label"));
    PatchPlan plan;
    plan.target_name = "label";
    plan.replacement_fragment = std::string(tree.text(node));
    auto result = apply_patch(tree, plan);
    REQUIRE(result.status == PatchResult::Status::applied);
    CHECK(*result.patched_text == kFile);
    CHECK(result.inserted_count == 0);
}

TEST_CASE("apply_patch replaces only the target span") {
    auto tree = parsed();
    PatchPlan plan;
    plan.target_name = "label";
    plan.replacement_fragment = "String label() {\n        return \"CALC\";\n    }";
    auto result = apply_patch(tree, plan);
    REQUIRE(result.status == PatchResult::Status::applied);
    CHECK(result.patched_text->find("return \"CALC\";") != std::string::npos);
    CHECK(result.patched_text->find("int add(int a, int b)") != std::string::npos);
    CHECK(result.patched_text->substr(0, 13) == "package demo;");
}

TEST_CASE("apply_patch inserts auxiliary methods after the target") {
    auto tree = parsed();
    PatchPlan plan;
    plan.target_name = "label";
    plan.replacement_fragment = "String label() {\n        return prefix() + \"calc\";\n    }";
    plan.auxiliary_fragments = {"String prefix() {\n        return \">\";\n    }"};
    auto result = apply_patch(tree, plan);
    REQUIRE(result.status == PatchResult::Status::applied);
    CHECK(result.inserted_count == 1);
    size_t label_pos = result.patched_text->find("String label()");
    size_t helper_pos = result.patched_text->find("String prefix()");
    REQUIRE(label_pos != std::string::npos);
    REQUIRE(helper_pos != std::string::npos);
    CHECK(helper_pos > label_pos);
    CHECK(parse_source(*result.patched_text).ok());
}

TEST_CASE("apply_patch reports the failure stage of bad fragments") {
    auto tree = parsed();
    PatchPlan plan;
    plan.target_name = "label";
    SUBCASE("lexical fault in replacement") {
        plan.replacement_fragment = "String label() { return \"x\\\n\"; }";
        auto result = apply_patch(tree, plan);
        CHECK(result.status == PatchResult::Status::failed);
        CHECK(result.failure_stage == ParseStage::lexical);
    }
    SUBCASE("grammar fault in replacement") {
        plan.replacement_fragment = "public String label(String name) or label() {}";
        auto result = apply_patch(tree, plan);
        CHECK(result.status == PatchResult::Status::failed);
        CHECK(result.failure_stage == ParseStage::parsing);
    }
    SUBCASE("non-method fragment") {
        plan.replacement_fragment = "int stray;";
        auto result = apply_patch(tree, plan);
        CHECK(result.status == PatchResult::Status::failed);
        CHECK(result.failure_stage == ParseStage::parsing);
    }
}

TEST_CASE("parse_fragment validates kinds") {
    CHECK(parse_fragment("void f() {}", TargetKind::method).ok());
    CHECK(parse_fragment("class B { int x; }", TargetKind::clazz).ok());
    CHECK_FALSE(parse_fragment("void f( {}", TargetKind::method).ok());
    CHECK(parse_fragment("int f();", TargetKind::method).ok()); // abstract shape
}
