#include <iostream>
#include <string>
#include <vector>

#include "fat/reporting.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return fat::run_cli(args, std::cout, std::cerr);
}
