#include "shardex/cli/cli.hpp"

int main(int argc, char** argv) { return shardex::cli::main(argc, argv); }
