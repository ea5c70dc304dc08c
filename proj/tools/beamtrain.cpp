#include "beamtrain/cli.hpp"

int main(int argc, char** argv) { return beamtrain::cli_main(argc, argv); }
