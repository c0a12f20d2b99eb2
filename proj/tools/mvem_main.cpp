#include "mvem/cli.hpp"

int main(int argc, char** argv) { return mvem::run_cli(argc, argv); }
