#include "nclab_cli/cli.hpp"

int main(int argc, char** argv) { return nclab::cli::run(argc, argv); }
