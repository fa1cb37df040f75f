#include "cli.hpp"

int main(int argc, char** argv) { return smeq::cli_main(argc, argv); }
