#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace reflab {

struct CommandResult {
    int exit_code = -1;
    bool timed_out = false;
    bool start_failed = false; // binary missing or not executable
    std::string output;        // stdout and stderr, interleaved
};

struct Command {
    std::vector<std::string> argv;
    std::optional<std::string> working_dir;
    std::chrono::milliseconds timeout{std::chrono::minutes(10)};
    std::vector<std::pair<std::string, std::string>> extra_env;
};

// Runs the command in its own process group, captures combined output, and
// kills the whole group if the wall-clock timeout expires.
CommandResult run_command(const Command& cmd);

// Convenience: `sh -c <line>` with the same capture and timeout behavior.
CommandResult run_shell(const std::string& line, const std::string& working_dir,
                        std::chrono::milliseconds timeout);

} // namespace reflab
