#include "dirtrace/cli.hpp"

int main(int argc, char** argv) { return dirtrace::cli::run(argc, argv); }
