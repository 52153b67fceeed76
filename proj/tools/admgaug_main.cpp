#include "admgaug/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return admgaug::cli::run(argc, argv, std::cout, std::cerr); }
