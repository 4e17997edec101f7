#include "gprel/cli.hpp"

int main(int argc, char** argv) { return gprel::cli::run(argc, argv); }
