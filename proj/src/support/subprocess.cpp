#include "reflab/support/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

namespace reflab {

namespace {

constexpr unsigned char kStartFailSentinel = 0x7f;

} // namespace

CommandResult run_command(const Command& cmd) {
    CommandResult result;
    if (cmd.argv.empty()) {
        result.start_failed = true;
        result.output = "empty argv";
        return result;
    }

    int out_pipe[2];
    int err_pipe[2]; // exec-failure signalling, CLOEXEC so success closes it
    if (pipe(out_pipe) != 0 || pipe2(err_pipe, O_CLOEXEC) != 0) {
        result.start_failed = true;
        result.output = std::strerror(errno);
        return result;
    }

    pid_t pid = fork();
    if (pid < 0) {
        result.start_failed = true;
        result.output = std::strerror(errno);
        return result;
    }

    if (pid == 0) {
        setpgid(0, 0);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(out_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);

        if (cmd.working_dir && chdir(cmd.working_dir->c_str()) != 0) {
            unsigned char c = kStartFailSentinel;
            (void)!write(err_pipe[1], &c, 1);
            _exit(127);
        }
        for (const auto& [key, value] : cmd.extra_env)
            setenv(key.c_str(), value.c_str(), 1);

        std::vector<char*> argv;
        argv.reserve(cmd.argv.size() + 1);
        for (const auto& arg : cmd.argv)
            argv.push_back(const_cast<char*>(arg.c_str()));
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());

        unsigned char c = kStartFailSentinel;
        (void)!write(err_pipe[1], &c, 1);
        _exit(127);
    }

    setpgid(pid, pid);
    close(out_pipe[1]);
    close(err_pipe[1]);

    auto deadline = std::chrono::steady_clock::now() + cmd.timeout;
    bool exec_failed = false;
    bool killed = false;
    char buf[4096];

    struct pollfd fds[2];
    fds[0] = {out_pipe[0], POLLIN, 0};
    fds[1] = {err_pipe[0], POLLIN, 0};
    int open_fds = 2;

    while (open_fds > 0) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            if (!killed) {
                kill(-pid, SIGKILL);
                killed = true;
                result.timed_out = true;
            }
            remaining = std::chrono::milliseconds(100);
        }
        int rc = poll(fds, 2, static_cast<int>(remaining.count()));
        if (rc < 0 && errno != EINTR) break;
        if (rc <= 0) continue;
        for (auto& pfd : fds) {
            if (pfd.fd < 0 || !(pfd.revents & (POLLIN | POLLHUP))) continue;
            ssize_t n = read(pfd.fd, buf, sizeof(buf));
            if (n > 0) {
                if (pfd.fd == err_pipe[0]) {
                    exec_failed = true;
                } else {
                    result.output.append(buf, static_cast<size_t>(n));
                }
            } else if (n == 0 || (n < 0 && errno != EINTR && errno != EAGAIN)) {
                close(pfd.fd);
                pfd.fd = -1;
                --open_fds;
            }
        }
    }
    if (fds[0].fd >= 0) close(fds[0].fd);
    if (fds[1].fd >= 0) close(fds[1].fd);

    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {}

    if (result.timed_out) {
        result.exit_code = -1;
        result.output += "\n[timeout after " + std::to_string(cmd.timeout.count()) + " ms]";
    } else if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    if (exec_failed) {
        result.start_failed = true;
        if (result.output.empty())
            result.output = "could not execute: " + cmd.argv[0];
    }
    return result;
}

CommandResult run_shell(const std::string& line, const std::string& working_dir,
                        std::chrono::milliseconds timeout) {
    Command cmd;
    cmd.argv = {"/bin/sh", "-c", line};
    if (!working_dir.empty()) cmd.working_dir = working_dir;
    cmd.timeout = timeout;
    return run_command(cmd);
}

} // namespace reflab
