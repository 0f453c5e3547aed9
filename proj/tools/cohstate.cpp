#include "cohstate/cli.hpp"

int main(int argc, char** argv) { return cohstate::cli::main_entry(argc, argv); }
