#include "commands.hpp"

int main(int argc, char** argv) { return tempfid::cli::run(argc, argv); }
