#include "dpcg/cli.hpp"

int main(int argc, char** argv) { return dpcg::cli::main(argc, argv); }
