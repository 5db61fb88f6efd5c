#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return decoycli::run(argc, argv, std::cout, std::cerr); }
