#include <iostream>

#include "mqchain/experiments.hpp"

int main(int argc, char** argv) { return mqchain::run_cli(argc, argv, std::cout, std::cerr); }
