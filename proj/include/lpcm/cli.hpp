#pragma once

#include <string>
#include <vector>

namespace lpcm {

enum ExitCode : int {
    kExitSuccess = 0,
    kExitFailure = 1,
    kExitUsage = 2,
    kExitSolver = 3,
    kExitTopology = 4,
};

/// Entry point of the command-line tool; returns the process exit code.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

} // namespace lpcm
