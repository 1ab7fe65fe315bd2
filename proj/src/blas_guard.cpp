#include "chaology/blas_guard.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <string>
#include <unistd.h>

extern "C" char* openblas_get_corename(void);

namespace chaology {

const char* blas_core_name() { return openblas_get_corename(); }

void ensure_reliable_blas(int argc, char** argv) {
    if (argc < 1 || std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
    std::string core = blas_core_name();
    std::transform(core.begin(), core.end(), core.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (core != "cooperlake" && core != "sapphirerapids") return;
    ::setenv("OPENBLAS_CORETYPE", "SkylakeX", 1);
    ::execv("/proc/self/exe", argv);
}

}  // namespace chaology
