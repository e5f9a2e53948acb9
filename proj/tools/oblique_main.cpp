#include "oblique/scenario.hpp"

int main(int argc, char** argv) { return oblique::cli_main(argc, argv); }
