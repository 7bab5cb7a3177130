// Command-line front end. Subcommands are registered as the corresponding
// solver pieces come online; see cli.cpp for the dispatch table.
#include <cstdio>

int main(int argc, char** argv) {
    (void)argc;
    (void)argv;
    std::fprintf(stderr, "oslab: no subcommands wired up yet\n");
    return 2;
}
