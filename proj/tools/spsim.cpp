#include "spsim/cli/commands.hpp"

int main(int argc, char** argv) { return spsim::cli::run(argc, argv); }
