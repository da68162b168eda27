#include <iostream>

#include "wiman/cli_run.hpp"

int main(int argc, char** argv) { return wiman::run_cli(argc, argv, std::cout, std::cerr); }
