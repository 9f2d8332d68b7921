#include "fracheat/cli.hpp"

int main(int argc, char** argv) { return fracheat::cli_main(argc, argv); }
