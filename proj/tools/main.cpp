#include "hyperdisk_cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return hyperdisk::cli::run_command(args);
}
