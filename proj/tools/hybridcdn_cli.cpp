#include "hybridcdn/cli.hpp"

int main(int argc, char** argv) { return hybridcdn::cli_main(argc, argv); }
