#include "sosim/cli.hpp"

int main(int argc, char** argv) { return sosim::run_cli(argc, argv); }
