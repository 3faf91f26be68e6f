#include "fracgraph/cli.hpp"

int main(int argc, char** argv) { return fracgraph::main_entry(argc, argv); }
