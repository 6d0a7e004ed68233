#include "c2nlos/io.hpp"

int main(int argc, char** argv) { return c2nlos::cli_dispatch(argc, argv); }
