#include "run_config.hpp"

#include <iostream>

int main(int argc, char** argv) { return rotafem::cli::main_entry(argc, argv, std::cout, std::cerr); }
