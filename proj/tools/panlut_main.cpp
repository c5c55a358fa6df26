#include <string>
#include <vector>

#include "panlut/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return panlut::run_cli(args);
}
