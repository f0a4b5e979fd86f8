#include "reflab/extract/extract.hpp"
#include "reflab/support/errors.hpp"

#include <doctest.h>

#include <string>

using namespace reflab;

TEST_CASE("empty output extracts to three empty lists") {
    auto e = extract::extract("");
    CHECK(e.methods.empty());
    CHECK(e.classes.empty());
    CHECK(e.others.empty());
    auto blank = extract::extract("   \n\t\n");
    CHECK(blank.methods.empty());
    CHECK(blank.others.empty());
}

TEST_CASE("fenced method with surrounding prose is partitioned") {
    const std::string raw =
        "Here is the refactored code:\n"
        "```java\n"
        "public int add(int a, int b) {\n"
        "    return a + b;\n"
        "}\n"
        "```\n"
        "Hope this helps!\n";
    auto e = extract::extract(raw);
    REQUIRE(e.methods.size() == 1);
    CHECK(e.methods[0] == "public int add(int a, int b) {\n    return a + b;\n}");
    CHECK(e.classes.empty());
    REQUIRE(e.others.size() == 2);
    CHECK(e.others[0] == "Here is the refactored code:");
    CHECK(e.others[1] == "Hope this helps!");
}

TEST_CASE("prose inside a fence still lands in others") {
    const std::string raw =
        "```\n"
        "void f() { g(); }\n"
        "Hope this helps\n"
        "```\n";
    auto e = extract::extract(raw);
    REQUIRE(e.methods.size() == 1);
    CHECK(e.methods[0] == "void f() { g(); }");
    REQUIRE(e.others.size() == 1);
    CHECK(e.others[0] == "Hope this helps");
}

TEST_CASE("class declarations are routed to classes") {
    const std::string raw =
        "```java\n"
        "@Deprecated\n"
        "public final class Account implements Comparable<Account> {\n"
        "    private int balance;\n"
        "    public int balance() { return balance; }\n"
        "}\n"
        "```\n";
    auto e = extract::extract(raw);
    CHECK(e.methods.empty());
    REQUIRE(e.classes.size() == 1);
    CHECK(e.classes[0].substr(0, 11) == "@Deprecated");
    CHECK(e.classes[0].back() == '}');
    CHECK(extract::fragment_name(e.classes[0], corpus::TargetKind::clazz) == "Account");
}

TEST_CASE("multiple fenced blocks are processed in order") {
    const std::string raw =
        "First the helper:\n"
        "```java\n"
        "private static int half(int x) { return x / 2; }\n"
        "```\n"
        "Then the caller:\n"
        "```java\n"
        "int caller() { return half(4); }\n"
        "```\n";
    auto e = extract::extract(raw);
    REQUIRE(e.methods.size() == 2);
    CHECK(extract::fragment_name(e.methods[0], corpus::TargetKind::method) == "half");
    CHECK(extract::fragment_name(e.methods[1], corpus::TargetKind::method) == "caller");
    CHECK(e.others.size() == 2);
}

TEST_CASE("unfenced pure java is treated as code") {
    auto e = extract::extract("int twice(int x) {\n    return 2 * x;\n}\n");
    REQUIRE(e.methods.size() == 1);
    CHECK(e.methods[0].find("return 2 * x;") != std::string::npos);
}

TEST_CASE("unfenced prose goes to others untouched") {
    const std::string raw = "I'm sorry, I can't refactor this code.";
    auto e = extract::extract(raw);
    CHECK(e.methods.empty());
    CHECK(e.classes.empty());
    REQUIRE(e.others.size() == 1);
    CHECK(e.others[0] == raw);
}

TEST_CASE("constructors and annotated methods are recognized") {
    const std::string raw =
        "```java\n"
        "@Override\n"
        "public String toString() { return name; }\n"
        "\n"
        "Account(String name) throws IllegalArgumentException {\n"
        "    this.name = name;\n"
        "}\n"
        "```\n";
    auto e = extract::extract(raw);
    REQUIRE(e.methods.size() == 2);
    CHECK(e.methods[0].substr(0, 9) == "@Override");
    CHECK(extract::fragment_name(e.methods[1], corpus::TargetKind::method) == "Account");
}

TEST_CASE("statements and calls are not mistaken for declarations") {
    const std::string raw =
        "```java\n"
        "f();\n"
        "new Runnable() { };\n"
        "if (x) { g(); }\n"
        "```\n";
    auto e = extract::extract(raw);
    CHECK(e.methods.empty());
    CHECK(e.classes.empty());
    CHECK_FALSE(e.others.empty());
}

TEST_CASE("truncated fragments fall through to others") {
    const std::string raw =
        "```java\n"
        "public int add(int a, int b) {\n"
        "    return a +\n"
        "```\n";
    auto e = extract::extract(raw);
    CHECK(e.methods.empty());
    REQUIRE(e.others.size() == 1);
    CHECK(e.others[0].find("public int add") != std::string::npos);
}

TEST_CASE("extraction is idempotent over join") {
    const std::string samples[] = {
        "Some prose\n```java\nint f() { return g(); }\n```\nmore prose",
        "```java\nclass A { void m() {} }\n\nvoid loose() { }\n```",
        "plain prose only, no code here.",
        "int f() {\n  if (a) return 1;\n  return 2;\n}",
    };
    for (const std::string& raw : samples) {
        auto once = extract::extract(raw);
        auto twice = extract::extract(extract::join(once));
        CHECK(once.methods == twice.methods);
        CHECK(once.classes == twice.classes);
        CHECK(once.others == twice.others);
    }
}

TEST_CASE("code fragments are verbatim substrings of the raw output") {
    const std::string raw =
        "Intro.\n"
        "```java\n"
        "public   int  spaced (int a){ return a; }\n"
        "```\n";
    auto e = extract::extract(raw);
    REQUIRE(e.methods.size() == 1);
    CHECK(raw.find(e.methods[0]) != std::string::npos);
}

TEST_CASE("primary fragment selection by name with fallback") {
    extract::ExtractedCode e;
    e.methods = {"int helper() { return 1; }", "int target() { return 2; }"};

    auto by_name = extract::primary_fragment(e, corpus::TargetKind::method, "target");
    CHECK(by_name.text == e.methods[1]);
    CHECK(by_name.warnings.empty());

    auto by_signature =
        extract::primary_fragment(e, corpus::TargetKind::method, "int target(int seats)");
    CHECK(by_signature.text == e.methods[1]);

    auto fallback = extract::primary_fragment(e, corpus::TargetKind::method, "absent");
    CHECK(fallback.text == e.methods[0]);
    REQUIRE_FALSE(fallback.warnings.empty());
    CHECK(fallback.warnings[0].find("absent") != std::string::npos);

    CHECK_THROWS_AS(extract::primary_fragment(e, corpus::TargetKind::clazz, "Account"),
                    reflab::MissingFragmentError);
}
