#include "mpmg/cli.hpp"

int main(int argc, char** argv) { return mpmg::cli::run(argc, argv); }
