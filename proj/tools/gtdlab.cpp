#include "gtdlab/cli.hpp"

int main(int argc, char** argv) { return gtdlab::run_cli(argc, argv); }
