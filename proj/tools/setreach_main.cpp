#include "setreach/modelio.hpp"

#include <iostream>

int main(int argc, char** argv) { return setreach::cli_run(argc, argv, std::cout, std::cerr); }
