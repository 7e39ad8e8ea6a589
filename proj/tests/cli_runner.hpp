#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

namespace vt_test {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

/// Runs the command-line tool with `args`. stderr is discarded unless
/// `merge_stderr` folds it into `out`.
inline CliResult run_cli(const std::string& args, bool merge_stderr = false) {
    const std::string cmd =
        std::string("'") + VEINTEX_CLI_PATH + "' " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
    CliResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

inline std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

} // namespace vt_test
