#include <doctest.h>

#include "reflab/java/tree.hpp"

#include <cstring>

using namespace reflab::java;

TEST_CASE("parse_source accepts a minimal program") {
    auto outcome = parse_source("class A {}");
    REQUIRE(outcome.ok());
    auto classes = outcome.tree->find_all("class_declaration");
    CHECK(classes.size() == 1);
}

TEST_CASE("parse_source classifies lexical vs parsing failures") {
    SUBCASE("invalid tokens never reach the grammar") {
        auto outcome = parse_source("class A { String s = \"broken\\\n\"; }");
        CHECK(outcome.stage == ParseStage::lexical);
    }
    SUBCASE("valid tokens violating the grammar") {
        auto outcome = parse_source(
            "public class T { public T(String name) or T() {} }");
        CHECK(outcome.stage == ParseStage::parsing);
        CHECK_FALSE(outcome.message.empty());
    }
}

TEST_CASE("node spans nest within their parents and tile the file") {
    auto outcome = parse_source("class A { int f(int x) { return x + 1; } }");
    REQUIRE(outcome.ok());
    const auto& tree = *outcome.tree;
    bool nested_ok = true;
    tree.visit([&](TSNode node) {
        uint32_t n = ts_node_named_child_count(node);
        for (uint32_t i = 0; i < n; ++i) {
            TSNode child = ts_node_named_child(node, i);
            if (tree.start_byte(child) < tree.start_byte(node) ||
                tree.end_byte(child) > tree.end_byte(node))
                nested_ok = false;
        }
        return true;
    });
    CHECK(nested_ok);
    CHECK(tree.start_byte(tree.root()) == 0);
    CHECK(tree.end_byte(tree.root()) == tree.source().size());
}

TEST_CASE("text() returns the exact byte span") {
    auto outcome = parse_source("class A { void f() {} }");
    REQUIRE(outcome.ok());
    auto methods = outcome.tree->find_all("method_declaration");
    REQUIRE(methods.size() == 1);
    CHECK(outcome.tree->text(methods[0]) == "void f() {}");
}

TEST_CASE("full-grammar constructs parse: generics, lambdas, switch expressions") {
    const char* source = R"JAVA(
import java.util.*;
public sealed interface Shape permits Circle, Square {}
record Circle(double r) implements Shape {}
record Square(double s) implements Shape {}
class Demo {
    static <T extends Comparable<? super T>> T max(List<? extends T> xs) {
        return xs.stream().max(Comparable::compareTo).orElseThrow();
    }
    int area(Shape sh) {
        return switch (sh) {
            default -> 0;
        };
    }
    Runnable r = () -> System.out.println("x");
}
)JAVA";
    auto outcome = parse_source(source);
    CHECK(outcome.ok());
}
