#include <string>
#include <vector>

#include "happyreg/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return happyreg::cli::run(args);
}
