#include "fasris/cli.hpp"

int main(int argc, char** argv) { return fasris::run_cli(argc, argv); }
