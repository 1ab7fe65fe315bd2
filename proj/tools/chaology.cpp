#include <iostream>

#include "chaology/blas_guard.hpp"
#include "chaology/cli.hpp"

int main(int argc, char** argv) {
    chaology::ensure_reliable_blas(argc, argv);
    return chaology::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
