#include "rmatlas_cli/commands.hpp"

int main(int argc, char** argv) { return rmatlas::cli::run(argc, argv); }
