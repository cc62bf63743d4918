#include <iostream>

#include "coiso/cli.hpp"

int main(int argc, char** argv) { return coiso::run_cli(argc, argv, std::cout, std::cerr); }
