#include <string>
#include <vector>

#include "mixval/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return mixval::run_cli(args);
}
