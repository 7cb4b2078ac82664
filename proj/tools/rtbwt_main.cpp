#include <iostream>
#include <string>
#include <vector>

#include "rtbwt/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rtbwt::run_cli(args, std::cout, std::cerr);
}
