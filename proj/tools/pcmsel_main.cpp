#include "pcmsel/cli.hpp"

int main(int argc, char** argv) { return pcmsel::cli::run(argc, argv); }
