#include "motionskill/cli.hpp"

int main(int argc, char** argv) { return motionskill::cli::run(argc, argv); }
