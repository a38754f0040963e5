#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return offmoo::cli::run_cli(argc, argv, std::cout, std::cerr);
}
