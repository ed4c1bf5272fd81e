#include <iostream>
#include <string>
#include <vector>

#include "xroute/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return xroute::run_cli(args, std::cout, std::cerr);
}
