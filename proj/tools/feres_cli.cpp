#include <iostream>

#include "feres/cli.hpp"

int main(int argc, char** argv) { return feres::cli::run(argc, argv, std::cout, std::cerr); }
