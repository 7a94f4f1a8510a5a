#include "commands.hpp"

int main(int argc, char** argv) { return spdc::cli::run(argc, argv); }
