#include "fsi/cli.hpp"

int main(int argc, char** argv) { return fsi::cli::run(argc, argv); }
