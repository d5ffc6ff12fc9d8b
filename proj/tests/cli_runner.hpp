#pragma once

// Runs the built CLI binary (path injected by the build as GEMQP_CLI_PATH)
// and captures exit code, stdout and stderr through temporary files.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gemqp::test {

struct CliOutcome {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline CliOutcome run_cli(const std::string& args,
                          const std::string& stdin_data = "") {
    static int counter = 0;
    const std::string tag = std::to_string(++counter);
    const std::string in_path = "/tmp/gemqp_cli_in_" + tag;
    const std::string out_path = "/tmp/gemqp_cli_out_" + tag;
    const std::string err_path = "/tmp/gemqp_cli_err_" + tag;

    {
        std::ofstream in(in_path, std::ios::binary);
        in << stdin_data;
    }

    const std::string command = std::string(GEMQP_CLI_PATH) + " " + args +
                                " < " + in_path + " > " + out_path + " 2> " +
                                err_path;
    const int raw = std::system(command.c_str());
    if (raw == -1) throw std::runtime_error("failed to launch CLI");

    CliOutcome outcome;
    outcome.exit_code = WEXITSTATUS(raw);
    outcome.out = slurp(out_path);
    outcome.err = slurp(err_path);
    std::remove(in_path.c_str());
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return outcome;
}

}  // namespace gemqp::test
