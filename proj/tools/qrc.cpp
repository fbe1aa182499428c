#include <iostream>
#include <string>
#include <vector>

#include "qrc/cli.hpp"
#include "qrc/exec.hpp"

int main(int argc, char** argv) {
    qrc::configure_workers();
    const std::vector<std::string> args(argv + 1, argv + argc);
    return qrc::run_cli(args, std::cin, std::cout, std::cerr);
}
