#include "uwb/cli.hpp"

int main(int argc, char** argv) { return uwb::run_cli(argc, argv); }
