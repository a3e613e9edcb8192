#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
    return seedvos::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
