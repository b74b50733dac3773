#include "avghb/harness/cli.hpp"

int main(int argc, char** argv) { return avghb::harness::cli_main(argc, argv); }
