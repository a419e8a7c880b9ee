#include "fredhier_cli.hpp"

int main(int argc, char** argv) { return fredhier::cli::run(argc, argv); }
