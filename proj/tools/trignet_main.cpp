#include <vector>

#include "trignet/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return trignet::cli_run(args);
}
