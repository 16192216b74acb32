#include "mrkl/cli.hpp"

int main(int argc, char** argv) { return mrkl::cli::main_entry(argc, argv); }
