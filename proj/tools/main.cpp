#include "chanflow/commands.hpp"

int main(int argc, char** argv) { return chanflow::run_cli(argc, argv); }
