#include <iostream>
#include <string>
#include <vector>

#include "kroneig/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return kroneig::run_cli(args, std::cout, std::cerr);
}
