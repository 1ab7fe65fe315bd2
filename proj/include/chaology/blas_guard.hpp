#pragma once

namespace chaology {

/// OpenBLAS 0.3.20 selects Cooperlake kernels on AVX512-BF16 CPUs, and those
/// return wrong eigenvectors from the symmetric LAPACK drivers. Call first
/// thing in main(): when that core is active and the user has not chosen one,
/// re-executes the program with OPENBLAS_CORETYPE=SkylakeX. Returns normally
/// otherwise (including when re-exec fails).
void ensure_reliable_blas(int argc, char** argv);

/// Name of the kernel set OpenBLAS selected at load time.
const char* blas_core_name();

}  // namespace chaology
