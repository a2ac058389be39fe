#include "uniconc/cli.hpp"

int main(int argc, char** argv) { return uniconc::cli::run(argc, argv); }
