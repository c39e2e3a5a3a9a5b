#include <iostream>

#include "emm/cli.hpp"

int main(int argc, char** argv) { return emm::run_cli(argc, argv, std::cout, std::cerr); }
