#include <iostream>
#include <string>
#include <vector>

#include "patrol/cli.hpp"

int main(int argc, char** argv) {
    return patrol::run_command(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
