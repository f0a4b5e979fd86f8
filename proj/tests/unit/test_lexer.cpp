#include <doctest.h>

#include "reflab/java/lexer.hpp"

using namespace reflab::java;

TEST_CASE("tokenize covers literal forms") {
    auto result = tokenize("int x = 0x1F_2 + 0b10 + 017 + 1_000L + 1.5e-3f + 0x1.8p3 + .5d;");
    REQUIRE(result.ok());
    int ints = 0, floats = 0;
    for (const auto& t : result.tokens) {
        if (t.kind == TokenKind::IntLiteral) ++ints;
        if (t.kind == TokenKind::FloatLiteral) ++floats;
    }
    CHECK(ints == 4);
    CHECK(floats == 3);
}

TEST_CASE("tokenize handles strings, chars, text blocks, escapes") {
    CHECK(tokenize(R"(String s = "a\n\tA\" b";)").ok());
    CHECK(tokenize(R"(char c = '\'';)").ok());
    CHECK(tokenize("String t = \"\"\"\n  multi \"line\"\n  \"\"\";").ok());
    CHECK(tokenize(R"(char c = 'A';)").ok());
    CHECK(tokenize(R"(String o = "\101";)").ok());
}

TEST_CASE("tokenize flags lexical faults") {
    SUBCASE("string ending in a lone backslash before the line break") {
        auto result = tokenize("String s = \"broken\\\nrest\";");
        REQUIRE_FALSE(result.ok());
        CHECK(result.error->message.find("invalid escape") != std::string::npos);
    }
    SUBCASE("unterminated string") {
        CHECK_FALSE(tokenize("String s = \"open;").ok());
    }
    SUBCASE("invalid escape") {
        CHECK_FALSE(tokenize(R"(String s = "\q";)").ok());
    }
    SUBCASE("stray characters") {
        CHECK_FALSE(tokenize("int x = #5;").ok());
        CHECK_FALSE(tokenize("int `y = 1;").ok());
        CHECK_FALSE(tokenize("int z = \\1;").ok());
    }
    SUBCASE("unterminated block comment") {
        CHECK_FALSE(tokenize("/* no close").ok());
    }
    SUBCASE("malformed unicode escape") {
        CHECK_FALSE(tokenize(R"(String s = "\u00ZZ";)").ok());
    }
}

TEST_CASE("tokenize distinguishes keywords from identifiers") {
    auto result = tokenize("if (ifCount instanceof Integer) yield true; else x = null;");
    REQUIRE(result.ok());
    int keywords = 0, identifiers = 0;
    for (const auto& t : result.tokens) {
        if (t.kind == TokenKind::Keyword) ++keywords;
        if (t.kind == TokenKind::Identifier) ++identifiers;
    }
    CHECK(keywords == 4); // if, instanceof, yield, else
    CHECK(identifiers == 3); // ifCount, Integer, x
}

TEST_CASE("tokenize longest-match on compound operators") {
    auto result = tokenize("a >>>= b >>> c >> d >= e > f;");
    REQUIRE(result.ok());
    std::vector<std::string> ops;
    for (const auto& t : result.tokens)
        if (t.kind == TokenKind::Punct && t.text != ";") ops.push_back(t.text);
    CHECK(ops == std::vector<std::string>{">>>=", ">>>", ">>", ">=", ">"});
}

TEST_CASE("tokenize records offsets and lines") {
    auto result = tokenize("int a;\nint b;");
    REQUIRE(result.ok());
    CHECK(result.tokens[0].offset == 0);
    CHECK(result.tokens[0].line == 1);
    CHECK(result.tokens[3].line == 2);
}

TEST_CASE("comments are dropped, including doc comments") {
    auto result = tokenize("/** doc */ int x; // tail\n/* block */ int y;");
    REQUIRE(result.ok());
    CHECK(result.tokens.size() == 6);
}

TEST_CASE("is_java_keyword covers reserved words and literal words") {
    CHECK(is_java_keyword("if"));
    CHECK(is_java_keyword("instanceof"));
    CHECK(is_java_keyword("true"));
    CHECK(is_java_keyword("null"));
    CHECK_FALSE(is_java_keyword("ifCount"));
    CHECK_FALSE(is_java_keyword("String"));
}
