#include "javamini.hpp"

#include "reflab/support/fsutil.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace {

int usage() {
    std::fputs(
        "usage: javamini check <file.java>...   exit 0 if clean, 1 with diagnostics\n"
        "       javamini test <file.java>...    exit 0 all pass, 1 otherwise\n",
        stderr);
    return 2;
}

std::vector<javamini::SourceFile> read_sources(int argc, char** argv, int first) {
    std::vector<javamini::SourceFile> files;
    for (int i = first; i < argc; ++i)
        files.push_back({argv[i], reflab::read_file(argv[i])});
    return files;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) return usage();
    std::string command = argv[1];
    try {
        if (command == "check") {
            auto result = javamini::check(read_sources(argc, argv, 2));
            std::fputs(javamini::format_diagnostics(result).c_str(), stderr);
            return result.ok() ? 0 : 1;
        }
        if (command == "test") {
            auto result = javamini::run_tests(read_sources(argc, argv, 2));
            std::fputs(result.stdout_text.c_str(), stdout);
            std::fputs(javamini::format_test_output(result).c_str(), stdout);
            for (const auto& outcome : result.outcomes)
                if (outcome.status != javamini::TestStatus::pass) return 1;
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "javamini: %s\n", e.what());
        return 2;
    }
    return usage();
}
