#include <greenkit/cli.hpp>

#include "greenkit_fixtures.hpp"

int main(int argc, char** argv) { return greenkit::cli::run(argc, argv, greenkit_embedded_fixtures); }
