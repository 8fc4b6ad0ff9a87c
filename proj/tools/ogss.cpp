#include "ogss/cli/app.hpp"

int main(int argc, char** argv) { return ogss::cli::run(argc, argv); }
