#include "latlab/runner.hpp"

int main(int argc, char** argv) { return latlab::run_cli(argc, argv); }
