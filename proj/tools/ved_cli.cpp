#include <iostream>

#include "ved/cli.hpp"

int main(int argc, char** argv) { return ved::run_cli(argc, argv, std::cerr); }
