#include "guplab/cli.hpp"

int main(int argc, char** argv) { return guplab::cli::main(argc, argv); }
