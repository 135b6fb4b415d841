#include "netpred/cli.hpp"

int main(int argc, char** argv) { return netpred::cli_main(argc, argv); }
