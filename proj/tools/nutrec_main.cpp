#include <string>
#include <vector>

#include "nutrec/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nutrec::run_command(args);
}
