#include "reflab/metrics/metrics.hpp"
#include "reflab/support/errors.hpp"

#include <doctest.h>

using namespace reflab;

TEST_CASE("loc counts non-blank lines") {
    CHECK(metrics::loc("") == 0);
    CHECK(metrics::loc("int x;") == 1);
    CHECK(metrics::loc("int x;\n") == 1);
    CHECK(metrics::loc("a\n\nb\n   \nc") == 3);
    CHECK(metrics::loc("a\r\n\r\nb\r\n") == 2);
    CHECK(metrics::loc("   \n\t\n") == 0);
}

TEST_CASE("cyclomatic complexity of a straight-line method is 1") {
    auto report = metrics::cyclomatic_complexity("void f() { int x = 1; g(x); }");
    REQUIRE(report.callables.size() == 1);
    CHECK(report.callables[0].name == "f");
    CHECK(report.callables[0].value == 1);
    CHECK(report.total == 1);
}

TEST_CASE("cyclomatic complexity counts each decision point once") {
    const std::string body = R"(
int f(int a, int b) {
    if (a > 0 && b > 0) {           // if + &&
        for (int i = 0; i < a; i++) // for
            b += i;
    } else if (a < 0) {             // if
        while (b > 0) b--;          // while
    }
    switch (a) {
        case 1:                     // case
        case 2:                     // case
            b++;
            break;
        default:
            break;
    }
    try {
        b = a / b;
    } catch (ArithmeticException e) { // catch
        b = 0;
    }
    return b > 0 ? b : -b;           // ternary
}
)";
    auto report = metrics::cyclomatic_complexity(body);
    REQUIRE(report.callables.size() == 1);
    CHECK(report.callables[0].value == 1 + 9);
}

TEST_CASE("do-while and enhanced for are decision points") {
    auto report = metrics::cyclomatic_complexity(
        "void f(int[] xs) { do { g(); } while (h()); for (int x : xs) g(); }");
    REQUIRE(report.callables.size() == 1);
    CHECK(report.callables[0].value == 3);
}

TEST_CASE("nested callables are reported separately, lambdas are not") {
    const std::string unit = R"(
class A {
    int outer(int x) {
        Runnable r = () -> { if (x > 0) System.out.println(x); };
        return x;
    }
    int helper(int y) { return y > 0 ? y : 0; }
}
)";
    auto report = metrics::cyclomatic_complexity(unit);
    REQUIRE(report.callables.size() == 2);
    CHECK(report.callables[0].name == "outer");
    CHECK(report.callables[0].value == 2); // the lambda's if accrues here
    CHECK(report.callables[1].name == "helper");
    CHECK(report.callables[1].value == 2);
    CHECK(report.total == 4);
}

TEST_CASE("complexity of a statement fragment lands on the synthetic callable") {
    auto report = metrics::cyclomatic_complexity("if (a) b(); else c();");
    REQUIRE(report.callables.size() == 1);
    CHECK(report.callables[0].name == "(fragment)");
    CHECK(report.callables[0].value == 2);
}

TEST_CASE("complexity of unparsable text is unavailable, not zero") {
    CHECK_THROWS_AS(metrics::cyclomatic_complexity("this is prose, not Java"),
                    reflab::MetricUnavailableError);
    CHECK_THROWS_AS(metrics::cyclomatic_complexity("void f() { \"unterminated }"),
                    reflab::MetricUnavailableError);
}

TEST_CASE("fan-out counts method invocations, not constructors") {
    CHECK(metrics::fan_out("void f() { g(); }") == 1);
    CHECK(metrics::fan_out("void f() { a.g(h()); }") == 2);
    CHECK(metrics::fan_out("void f() { Object o = new Object(); }") == 0);
    CHECK(metrics::fan_out("void f() { list.stream().map(x -> x).count(); }") == 3);
    CHECK(metrics::fan_out("int f(int x) { return x + 1; }") == 0);
}

TEST_CASE("fan-out accepts bare statement fragments") {
    CHECK(metrics::fan_out("a.f(); g(h());") == 3);
}

TEST_CASE("fragment wrappers cover unit, member, and statement shapes") {
    CHECK_NOTHROW(metrics::parse_fragment_tolerant("class A { void f() {} }"));
    CHECK_NOTHROW(metrics::parse_fragment_tolerant("void f() {}"));
    CHECK_NOTHROW(metrics::parse_fragment_tolerant("int x = 1; f(x);"));
    CHECK_THROWS_AS(metrics::parse_fragment_tolerant("not java at all'"),
                    reflab::MetricUnavailableError);
}
