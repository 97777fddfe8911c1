#include "arc/cli/cli.hpp"

int main(int argc, char** argv) {
    return arc::cli::run(std::vector<std::string>(argv, argv + argc));
}
