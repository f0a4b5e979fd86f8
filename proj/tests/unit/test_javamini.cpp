#include "javamini/javamini.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <string>
#include <vector>

using javamini::SourceFile;
using javamini::TestStatus;

namespace {

javamini::CheckResult check_one(const std::string& text) {
    return javamini::check({{"Main.java", text}});
}

bool has_diagnostic(const javamini::CheckResult& result, const std::string& message,
                    const std::string& note = "") {
    for (const auto& d : result.diagnostics) {
        if (d.message.find(message) == std::string::npos) continue;
        if (note.empty()) return true;
        for (const auto& n : d.notes)
            if (n.find(note) != std::string::npos) return true;
    }
    return false;
}

} // namespace

TEST_CASE("checker accepts a well-formed static class") {
    auto result = check_one(R"(
public class Main {
    private static int counter = 0;

    public static int next() {
        counter = counter + 1;
        return counter;
    }

    public static String label(int n) {
        if (n < 0) {
            return "neg";
        }
        return "pos:" + n;
    }
}
)");
    CHECK(result.ok());
    CHECK(javamini::format_diagnostics(result).empty());
}

TEST_CASE("undeclared identifiers surface as cannot find symbol variable") {
    auto result = check_one(R"(
public class Buffer {
    public static void store(int value) {
        data[offset] = value;
    }
}
)");
    REQUIRE_FALSE(result.ok());
    CHECK(has_diagnostic(result, "cannot find symbol", "symbol:   variable data"));
    CHECK(has_diagnostic(result, "cannot find symbol", "symbol:   variable offset"));
    CHECK(result.diagnostics.front().line == 4);
    std::string formatted = javamini::format_diagnostics(result);
    CHECK(formatted.find("Main.java:4: error: cannot find symbol") != std::string::npos);
    CHECK(formatted.find("  symbol:   variable data") != std::string::npos);
    CHECK(formatted.find("  location: class Buffer") != std::string::npos);
    CHECK(formatted.find("errors\n") != std::string::npos);
}

TEST_CASE("unqualified call without a local definition is cannot find symbol method") {
    auto result = check_one(R"(
public class SeatTest {
    public static void testReserve() {
        assertTrue(1 > 0);
    }
}
)");
    REQUIRE_FALSE(result.ok());
    CHECK(has_diagnostic(result, "cannot find symbol", "symbol:   method assertTrue"));
}

TEST_CASE("calls resolve across files and report bad arity") {
    std::vector<SourceFile> files = {
        {"Calc.java", R"(
public class Calc {
    public static int add(int a, int b) { return a + b; }
}
)"},
        {"Use.java", R"(
public class Use {
    public static int twice() { return Calc.add(1); }
}
)"}};
    auto result = javamini::check(files);
    REQUIRE_FALSE(result.ok());
    CHECK(has_diagnostic(result, "method add in class Calc cannot be applied to given types"));
    CHECK(has_diagnostic(result, "", "required: int,int"));
    CHECK(has_diagnostic(result, "", "reason: actual and formal argument lists differ in length"));
}

TEST_CASE("duplicate members are reported as already defined") {
    auto result = check_one(R"(
public class Main {
    static int x;
    static int x;

    static void go(int a) {}
    static void go(int a) {}
}
)");
    CHECK(has_diagnostic(result, "variable x is already defined in class Main"));
    CHECK(has_diagnostic(result, "method go(int) is already defined in class Main"));
}

TEST_CASE("instance state used from a static method is a static-context error") {
    auto result = check_one(R"(
public class Main {
    int total;

    static int read() {
        return total;
    }
}
)");
    CHECK(has_diagnostic(result,
                         "non-static variable total cannot be referenced from a static context"));
}

TEST_CASE("missing return and final reassignment are flagged") {
    auto result = check_one(R"(
public class Main {
    static int pick(int n) {
        if (n > 0) {
            return 1;
        }
    }

    static void set() {
        final int limit = 5;
        limit = 6;
    }
}
)");
    CHECK(has_diagnostic(result, "missing return statement"));
    CHECK(has_diagnostic(result, "cannot assign a value to final variable limit"));
}

TEST_CASE("checker handles bad override annotations and static locals") {
    auto result = check_one(R"(
public class Main {
    @Override
    public int size() { return 0; }

    static void a() {
        static int x = 1;
    }
}
)");
    CHECK(has_diagnostic(result,
                         "method does not override or implement a method from a supertype"));
    CHECK(has_diagnostic(result, "modifier static not allowed here"));
}

TEST_CASE("parenthesized assignment targets are rejected before checking") {
    // javac parses `(y) = 5;` and rejects it semantically; the grammar here
    // refuses it outright, so it surfaces as a parse diagnostic instead.
    auto result = check_one(R"(
public class Main {
    static void b() {
        int y = 0;
        (y) = 5;
    }
}
)");
    REQUIRE_FALSE(result.ok());
    CHECK(result.diagnostics.size() == 1);
    CHECK(result.diagnostics.front().message.find("unexpected input") !=
          std::string::npos);
}

TEST_CASE("toString-style overrides of Object are accepted") {
    auto result = check_one(R"(
public class Main {
    @Override
    public String toString() { return "main"; }
}
)");
    CHECK(result.ok());
}

TEST_CASE("lossy numeric conversions are incompatible types") {
    auto result = check_one(R"(
public class Main {
    static int shrink(long wide) {
        int n = wide;
        return n;
    }

    static boolean flag() {
        boolean b = 1;
        return b;
    }
}
)");
    CHECK(has_diagnostic(result, "possible lossy conversion from long to int"));
    CHECK(has_diagnostic(result, "incompatible types: int cannot be converted to boolean"));
}

TEST_CASE("checker resolves loop variables, catches, and builtin classes") {
    auto result = check_one(R"(
public class Main {
    static long sum(int[] values) {
        long total = 0;
        for (int v : values) {
            total += v;
        }
        for (int i = 0; i < values.length; i++) {
            total += values[i];
        }
        try {
            total += Integer.parseInt("3");
        } catch (NumberFormatException e) {
            System.out.println(e.getMessage());
        }
        return Math.max(total, 0L);
    }
}
)");
    CHECK(result.ok());
}

TEST_CASE("syntax errors are reported instead of crashing the checker") {
    auto result = check_one("public class Main { int f( { }");
    CHECK_FALSE(result.ok());
}

TEST_CASE("interpreter runs discovered tests in source order") {
    std::vector<SourceFile> files = {{"MathTest.java", R"(
public class MathTest {
    public static void testB() {}
    public static void testA() {}
    static void helper() { throw new RuntimeException("never discovered"); }
    public static void other() {}
}
)"}};
    auto result = javamini::run_tests(files);
    REQUIRE(result.outcomes.size() == 2);
    CHECK(result.outcomes[0].id == "MathTest.testB");
    CHECK(result.outcomes[1].id == "MathTest.testA");
    CHECK(result.outcomes[0].status == TestStatus::pass);
}

TEST_CASE("assertion failures and unexpected exceptions map to FAIL and ERROR") {
    std::vector<SourceFile> files = {{"T.java", R"(
public class Check {
    static void assertEquals(long expected, long actual) {
        if (expected != actual) {
            throw new AssertionError("expected:<" + expected + "> but was:<" + actual + ">");
        }
    }
}
)"},
                                     {"SampleTest.java", R"(
public class SampleTest {
    public static void testPasses() {
        Check.assertEquals(4, 2 + 2);
    }

    public static void testFails() {
        Check.assertEquals(4, 5);
    }

    public static void testCrashes() {
        int zero = 0;
        int boom = 1 / zero;
    }
}
)"}};
    auto result = javamini::run_tests(files);
    REQUIRE(result.outcomes.size() == 3);
    CHECK(result.outcomes[0].status == TestStatus::pass);
    CHECK(result.outcomes[1].status == TestStatus::fail);
    CHECK(result.outcomes[1].detail ==
          "AssertionError: expected:<4> but was:<5>");
    CHECK(result.outcomes[2].status == TestStatus::error);
    CHECK(result.outcomes[2].detail == "ArithmeticException: / by zero");

    std::string formatted = javamini::format_test_output(result);
    CHECK(formatted.find("TEST SampleTest.testPasses PASS\n") != std::string::npos);
    CHECK(formatted.find("TEST SampleTest.testFails FAIL AssertionError") !=
          std::string::npos);
    CHECK(formatted.find("TEST SampleTest.testCrashes ERROR ArithmeticException: / by zero\n") !=
          std::string::npos);
    CHECK(formatted.find("SUMMARY total=3 passed=1 failed=1 errors=1\n") !=
          std::string::npos);
}

TEST_CASE("interpreter evaluates strings, recursion, and ternaries") {
    std::vector<SourceFile> files = {{"S.java", R"(
public class Strings {
    static String reverse(String s) {
        if (s.length() <= 1) {
            return s;
        }
        return reverse(s.substring(1)) + s.charAt(0);
    }

    static String classify(int n) {
        return n % 2 == 0 ? "even" : "odd";
    }
}
)"},
                                     {"ST.java", R"(
public class StringsTest {
    public static void testReverse() {
        if (!Strings.reverse("abcdef").equals("fedcba")) {
            throw new AssertionError(Strings.reverse("abcdef"));
        }
    }

    public static void testClassify() {
        if (!Strings.classify(7).equals("odd")) {
            throw new AssertionError("wrong parity");
        }
        System.out.println("classified " + Strings.classify(8));
    }
}
)"}};
    auto result = javamini::run_tests(files);
    REQUIRE(result.outcomes.size() == 2);
    CHECK(result.outcomes[0].status == TestStatus::pass);
    CHECK(result.outcomes[1].status == TestStatus::pass);
    CHECK(result.stdout_text == "classified even\n");
}

TEST_CASE("interpreter supports static state, arrays, and switch") {
    std::vector<SourceFile> files = {{"C.java", R"(
public class Counter {
    static int[] bins = new int[3];
    static int total = 0;

    static void hit(int bin) {
        bins[bin]++;
        total++;
    }

    static String name(int bin) {
        switch (bin) {
            case 0:
                return "low";
            case 1:
                return "mid";
            default:
                return "high";
        }
    }
}
)"},
                                     {"CT.java", R"(
public class CounterTest {
    public static void testHits() {
        Counter.hit(0);
        Counter.hit(2);
        Counter.hit(2);
        if (Counter.total != 3 || Counter.bins[2] != 2) {
            throw new AssertionError("total=" + Counter.total);
        }
        if (!Counter.name(1).equals("mid")) {
            throw new AssertionError(Counter.name(1));
        }
    }
}
)"}};
    auto result = javamini::run_tests(files);
    REQUIRE(result.outcomes.size() == 1);
    CHECK(result.outcomes[0].status == TestStatus::pass);
}

TEST_CASE("interpreter dispatches instance methods and user exceptions") {
    std::vector<SourceFile> files = {{"A.java", R"(
public class Account {
    private long balance;

    public Account(long opening) {
        balance = opening;
    }

    public void withdraw(long amount) {
        if (amount > balance) {
            throw new IllegalStateException("overdrawn");
        }
        balance -= amount;
    }

    public long balance() {
        return balance;
    }
}
)"},
                                     {"AT.java", R"(
public class AccountTest {
    public static void testWithdraw() {
        Account account = new Account(100);
        account.withdraw(30);
        if (account.balance() != 70) {
            throw new AssertionError("balance " + account.balance());
        }
        try {
            account.withdraw(1000);
            throw new AssertionError("expected failure");
        } catch (IllegalStateException e) {
            if (!e.getMessage().equals("overdrawn")) {
                throw new AssertionError(e.getMessage());
            }
        }
    }
}
)"}};
    auto result = javamini::run_tests(files);
    REQUIRE(result.outcomes.size() == 1);
    CHECK(result.outcomes[0].status == TestStatus::pass);
}

TEST_CASE("runaway recursion surfaces as an error, not a harness crash") {
    std::vector<SourceFile> files = {{"R.java", R"(
public class LoopTest {
    static int spin(int n) {
        return spin(n + 1);
    }

    public static void testSpin() {
        spin(0);
    }
}
)"}};
    auto result = javamini::run_tests(files);
    REQUIRE(result.outcomes.size() == 1);
    CHECK(result.outcomes[0].status == TestStatus::error);
    CHECK(result.outcomes[0].detail.find("StackOverflowError") != std::string::npos);
}

TEST_CASE("double formatting matches Java conventions in concatenation") {
    std::vector<SourceFile> files = {{"D.java", R"(
public class FormatTest {
    public static void testPrint() {
        double half = 1.0 / 2;
        System.out.println("half=" + half);
        System.out.println("whole=" + (double) 3);
        System.out.println("int=" + (7 / 2));
    }
}
)"}};
    auto result = javamini::run_tests(files);
    REQUIRE(result.outcomes.size() == 1);
    CHECK(result.outcomes[0].status == TestStatus::pass);
    CHECK(result.stdout_text == "half=0.5\nwhole=3.0\nint=3\n");
}
