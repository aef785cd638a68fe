#include <iostream>

#include "bbassign/cli.hpp"

int main(int argc, char** argv) { return bbassign::run_cli(argc, argv, std::cout, std::cerr); }
