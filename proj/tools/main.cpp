#include "cli.hpp"

int main(int argc, char** argv) { return polymesh::cli::run(argc, argv); }
