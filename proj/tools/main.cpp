#include <iostream>

#include "kiloswarm/cli.hpp"

int main(int argc, char** argv) {
    return kiloswarm::cli_main({argv + 1, argv + argc}, std::cout, std::cerr);
}
