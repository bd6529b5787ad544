#include "repemp/cli.hpp"

int main(int argc, char** argv) { return repemp::run_cli(argc, argv); }
