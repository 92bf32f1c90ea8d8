#include "cgl/io.hpp"

int main(int argc, char** argv) { return cgl::cli_main(argc, argv); }
