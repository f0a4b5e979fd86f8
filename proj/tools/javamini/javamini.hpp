#pragma once

#include <string>
#include <vector>

// Compiler-shaped checking and test execution for the all-static Java subset
// used by the bundled mini-projects. The checker resolves names over concrete
// syntax trees and prints javac-style diagnostics; the interpreter executes
// static methods so test suites can run without a JVM.
namespace javamini {

struct SourceFile {
    std::string path;
    std::string text;
};

struct Diagnostic {
    std::string path;
    int line = 0;
    std::string message;                 // first line, after "error: "
    std::vector<std::string> notes;      // indented continuation lines
};

struct CheckResult {
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return diagnostics.empty(); }
};

CheckResult check(const std::vector<SourceFile>& files);

// javac layout: "path:line: error: message" + indented notes + "N error(s)".
std::string format_diagnostics(const CheckResult& result);

enum class TestStatus { pass, fail, error };

struct TestOutcome {
    std::string id; // Class.method
    TestStatus status = TestStatus::pass;
    std::string detail;
};

struct TestRunResult {
    std::vector<TestOutcome> outcomes;
    std::string stdout_text; // accumulated System.out.println output
};

// Runs every static zero-argument method named test* in classes named *Test,
// in source order. AssertionError -> fail; any other throw -> error.
TestRunResult run_tests(const std::vector<SourceFile>& files);

// "TEST Class.method PASS|FAIL|ERROR [detail]" lines plus a SUMMARY line.
std::string format_test_output(const TestRunResult& result);

} // namespace javamini
