#include "reflab/metrics/codebleu.hpp"
#include "reflab/support/errors.hpp"

#include <doctest.h>

using namespace reflab;
using doctest::Approx;

TEST_CASE("codebleu of identical inputs is 1 in every component") {
    const std::string code = R"(
public int reserve(int seats) {
    if (seats <= 0) throw new IllegalArgumentException("seats");
    int next = booked + seats;
    if (next > capacity) return booked;
    booked = next;
    return booked;
}
)";
    auto r = metrics::codebleu(code, code);
    CHECK(r.ngram == Approx(1.0));
    CHECK(r.weighted_ngram == Approx(1.0));
    CHECK(r.ast_match == Approx(1.0));
    CHECK(r.dataflow_match == Approx(1.0));
    CHECK(r.combined == Approx(1.0));
}

TEST_CASE("codebleu rejects empty or token-free inputs") {
    CHECK_THROWS_AS(metrics::codebleu("", "int x;"), reflab::UndefinedMetricError);
    CHECK_THROWS_AS(metrics::codebleu("int x;", ""), reflab::UndefinedMetricError);
    CHECK_THROWS_AS(metrics::codebleu("  \n ", "int x;"), reflab::UndefinedMetricError);
}

// Hand-derived on "int x = 1 ;" vs "int y = 1 ;" (five tokens each, BP = 1):
//   plain   p1 = 4/5, p2 = (2+1)/(4+1), p3 = (1+1)/(3+1), p4 = (0+1)/(2+1)
//   weighted (int = 1.0, others 0.2)
//           p1 = 1.6/1.8, p2 = 1.4/2.6, p3 = 1.2/2.4, p4 = 1.0/2.2
TEST_CASE("codebleu n-gram components match the hand computation") {
    auto r = metrics::codebleu("int y = 1;", "int x = 1;");
    CHECK(r.ngram == Approx(0.53182959).epsilon(1e-6));
    CHECK(r.weighted_ngram == Approx(0.57429809).epsilon(1e-6));
}

TEST_CASE("renaming variables preserves ast and dataflow components") {
    const std::string ref = "int total = base(); int twice = total * 2; emit(twice);";
    const std::string cand = "int t = base(); int u = t * 2; emit(u);";
    auto r = metrics::codebleu(cand, ref);
    CHECK(r.ast_match == Approx(1.0));
    CHECK(r.dataflow_match == Approx(1.0));
    CHECK(r.ngram < 1.0);
}

TEST_CASE("broken dataflow lowers only the dataflow component") {
    const std::string ref = "int t = base(); emit(t);";
    const std::string wired = "int q = base(); emit(q);";
    const std::string rewired = "int q = base(); emit(other);";
    CHECK(metrics::codebleu(wired, ref).dataflow_match == Approx(1.0));
    CHECK(metrics::codebleu(rewired, ref).dataflow_match < 1.0);
}

TEST_CASE("structural divergence lowers the ast component") {
    const std::string ref = "int f(int a) { if (a > 0) { return a; } return -a; }";
    const std::string same_shape = "int g(int b) { if (b > 0) { return b; } return -b; }";
    const std::string flat = "int g(int b) { return b; }";
    CHECK(metrics::codebleu(same_shape, ref).ast_match == Approx(1.0));
    auto r = metrics::codebleu(flat, ref);
    CHECK(r.ast_match < 1.0);
    CHECK(r.ast_match > 0.0);
}

TEST_CASE("reference without def-use edges scores dataflow vacuously") {
    auto r = metrics::codebleu("int x = 1; f(x);", "f(); g();");
    CHECK(r.dataflow_match == Approx(1.0));
}

TEST_CASE("combined is the equal-weight average of the four components") {
    auto r = metrics::codebleu("int y = compute(); use(y);",
                               "int x = compute(); use(x); log(x);");
    CHECK(r.combined ==
          Approx(0.25 * (r.ngram + r.weighted_ngram + r.ast_match + r.dataflow_match)));
    CHECK(r.combined > 0.0);
    CHECK(r.combined < 1.0);
}

TEST_CASE("codebleu tolerates prose-like unparsable candidates") {
    auto r = metrics::codebleu("the method was removed entirely",
                               "int f() { return 1; }");
    CHECK(r.combined >= 0.0);
    CHECK(r.ast_match < 1.0);
}
