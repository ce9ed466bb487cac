#include "ehsim/cli.hpp"

int main(int argc, char** argv) { return ehsim::cli_main(argc, argv); }
