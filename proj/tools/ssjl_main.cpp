#include <iostream>

#include "ssjl_cli.hpp"

int main(int argc, char** argv) { return ssjl::cli::run_cli(argc, argv, std::cout, std::cerr); }
