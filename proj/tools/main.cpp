#include "cli.hpp"

int main(int argc, char** argv) { return floodreg::cli::run(argc, argv); }
