#include "anderson/cli.hpp"

int main(int argc, char** argv) { return anderson::cli::main(argc, argv); }
