// tools/main.cpp

#include "cli.hpp"

int main(int argc, char** argv) { return potts::cli::run_cli(argc, argv); }
