#include <iostream>

#include "repeater_rate/cli.hpp"

int main(int argc, char** argv) { return repeater_rate::cli::run(argc, argv, std::cout, std::cerr); }
