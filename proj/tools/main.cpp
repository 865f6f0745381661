#include "cli.hpp"

int main(int argc, char** argv) { return jointgen::cli::run(argc, argv); }
