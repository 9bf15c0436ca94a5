#include "allostasis/cli.hpp"

int main(int argc, char** argv) { return allostasis::cli::main(argc, argv); }
