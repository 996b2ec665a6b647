#include <iostream>

#include "dflow/cli.hpp"

int main(int argc, char** argv) {
    return dflow::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout,
                          std::cerr);
}
