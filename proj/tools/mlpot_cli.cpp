#include <iostream>

#include "mlpot/runner.hpp"

int main(int argc, char** argv) { return mlpot::cli_main(argc, argv, std::cout, std::cerr); }
