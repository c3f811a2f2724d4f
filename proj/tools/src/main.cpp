#include "rnc_cli/run.hpp"

int main(int argc, char** argv) { return rnc::cli::run(argc, argv); }
