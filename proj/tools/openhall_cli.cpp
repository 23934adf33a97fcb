#include <iostream>

#include "openhall/cli.hpp"

int main(int argc, char** argv) { return openhall::cli::run(argc, argv, std::cout, std::cerr); }
