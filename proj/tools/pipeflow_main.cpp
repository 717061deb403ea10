/// @file pipeflow_main.cpp
/// @brief Entry point for the pipeflow command-line tool.

#include <string>
#include <vector>

#include "pipeflow/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pipeflow::run_cli(args);
}
