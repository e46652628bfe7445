#include <string>
#include <vector>

#include "memvote/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return memvote::run_cli(args);
}
