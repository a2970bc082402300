#include "fwa/cli.hpp"

int main(int argc, char** argv) { return fwa::run_cli(argc, argv); }
