#include "kinetgan/cli.hpp"

int main(int argc, char** argv) { return kinetgan::cli::run(argc, argv); }
