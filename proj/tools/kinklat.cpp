#include <iostream>
#include <string>
#include <vector>

#include "kinklat/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return kinklat::run_cli(args, std::cout, std::cerr);
}
