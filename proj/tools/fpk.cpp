#include "fpk/cli.hpp"

int main(int argc, char** argv) { return fpk::cli::run(argc, argv); }
