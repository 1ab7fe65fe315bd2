#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "chaology/fitting.hpp"
#include "chaology/model.hpp"
#include "chaology/spectral.hpp"

namespace chaology {

/// Ascending eigenvalues and grid-sampled eigenfunctions (one per column),
/// normalized so that Σ_k Ψ(k)²·weight = 1.
struct EigenDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    Grid2D grid;
    PendulumParams params;
    Stencil stencil = Stencil::fourier;

    std::size_t count() const { return std::size_t(eigenvalues.size()); }
    std::size_t dim() const { return std::size_t(eigenvectors.rows()); }
};

/// Dense symmetric eigensolve through LAPACK; eigenvectors have unit
/// Euclidean norm. `k_lowest` restricts the output to the lowest k pairs.
/// Throws ConvergenceFailure when LAPACK reports non-convergence.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> symmetric_eigen(
    Eigen::MatrixXd a, std::optional<std::size_t> k_lowest = std::nullopt);

/// Within each run of eigenvalues separated by less than `gap`, rotate the
/// vectors onto eigenvectors of the permutation `perm` (an involution).
/// Afterwards every column is sign-fixed: its largest-magnitude entry is positive.
void orient_degenerate(const Eigen::VectorXd& values, Eigen::MatrixXd& vectors,
                       const std::vector<std::size_t>& perm, double gap = 1e-10);

EigenDecomposition solve(const HamiltonianMatrix& h,
                         std::optional<std::size_t> k_lowest = std::nullopt);

/// max_n ‖HΨn − EnΨn‖₂ / (‖Ψn‖₂·max(1, |En|)).
double max_residual(const HamiltonianMatrix& h, const EigenDecomposition& eig);

struct ErrorEstimate {
    std::size_t level = 0;
    double ratio = 0.0;  ///< |E^A − E^B| / |E^A + E^B|
};

struct ErrorReport {
    std::vector<ErrorEstimate> levels;
    std::size_t reliable_count = 0;  ///< leading levels with ratio ≤ threshold
    double threshold = 1e-4;

    /// Leading-level count for another threshold.
    std::size_t count_within(double threshold) const;
};

/// Per-level two-resolution comparison over min(count) levels.
/// Throws ParamMismatch if the physical parameters differ.
ErrorReport estimate_errors(const EigenDecomposition& a, const EigenDecomposition& b,
                            double threshold = 1e-4);

/// Least-squares line En ≈ slope·n + intercept over levels n_lo..n_hi inclusive.
/// Throws RangeError unless n_lo < n_hi < number of levels.
LineFit fit_linear_spectrum(std::span<const double> eigenvalues, std::size_t n_lo,
                            std::size_t n_hi);
LineFit fit_linear_spectrum(const EigenDecomposition& eig, std::size_t n_lo, std::size_t n_hi);

// Binary cache of an eigendecomposition:
//   "DPND" | u32 version | u64 header length | JSON header | f64 eigenvalues |
//   f64 eigenvectors (column-major) | u64 CRC-64/XZ
// all little-endian. The checksum covers everything after the length field.
inline constexpr std::uint32_t cache_version = 1;

/// Writes to a temporary sibling and renames it into place.
void save_cache(const EigenDecomposition& eig, const std::filesystem::path& path);

/// Throws VersionMismatch, TruncatedFile or ChecksumMismatch.
EigenDecomposition load_cache(const std::filesystem::path& path);

/// File name identifying (params, grid, stencil, count); stable across runs.
std::string cache_file_name(const PendulumParams& params, const Grid2D& grid, Stencil stencil,
                            std::optional<std::size_t> k_lowest);

/// The stored checksum of a cache file (its last eight bytes).
std::uint64_t cache_checksum(const std::filesystem::path& path);

struct SolveRequest {
    PendulumParams params;
    int n1 = 48;
    int n2 = 48;
    Stencil stencil = Stencil::fourier;
    std::optional<std::size_t> k_lowest;
    std::size_t memory_budget_bytes = std::size_t(2) << 30;
    unsigned threads = 1;
};

struct CachedSolve {
    EigenDecomposition eig;
    bool cache_hit = false;
    std::filesystem::path path;  ///< empty when no cache directory was given
};

/// Loads the decomposition from `cache_dir` when present, otherwise assembles,
/// solves and stores it. Cache read errors propagate; the file is never rewritten.
CachedSolve solve_cached(const SolveRequest& request,
                         const std::optional<std::filesystem::path>& cache_dir);

/// CRC-64/XZ of a byte range.
std::uint64_t crc64(std::span<const unsigned char> bytes);

}  // namespace chaology
