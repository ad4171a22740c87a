#include "echelon/cli.hpp"

int main(int argc, char** argv) { return echelon::run_cli(argc, argv); }
