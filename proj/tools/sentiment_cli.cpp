#include "sentiment/cli.hpp"

int main(int argc, char** argv) { return sentiment::run_cli(argc, argv); }
