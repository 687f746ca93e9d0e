#include "cvsep/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cvsep::cli::run(argc, argv, std::cout, std::cerr); }
