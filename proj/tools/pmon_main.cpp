#include "pmon/cli.hpp"

int main(int argc, char** argv) { return pmon::cli::main(argc, argv); }
