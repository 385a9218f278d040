#include <iostream>
#include <string>
#include <vector>

#include "smd/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return smd::cli::run_cli(args, std::cout, std::cerr);
}
