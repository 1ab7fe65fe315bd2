#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "chaology/model.hpp"

namespace chaology {

/// Uniform periodic grid over [-π, π)² with no duplicated endpoint.
/// Flat index k = i·n2 + j (θ1 outer, θ2 inner).
struct Grid2D {
    int n1 = 0;
    int n2 = 0;
    std::vector<double> theta1_points;
    std::vector<double> theta2_points;
    double weight = 0.0;  ///< quadrature weight (2π/n1)(2π/n2)

    static Grid2D uniform(int n1, int n2);

    std::size_t dim() const { return std::size_t(n1) * std::size_t(n2); }
    std::size_t index(int i, int j) const { return std::size_t(i) * std::size_t(n2) + std::size_t(j); }
    double theta1_at(std::size_t k) const { return theta1_points[k / std::size_t(n2)]; }
    double theta2_at(std::size_t k) const { return theta2_points[k % std::size_t(n2)]; }

    /// The angle as a multiplication operator: θ itself, except that the jump
    /// at ±π is sampled at its midpoint 0, which keeps the operator parity-odd.
    double angle1_at(std::size_t k) const { return k / std::size_t(n2) == 0 ? 0.0 : theta1_at(k); }
    double angle2_at(std::size_t k) const { return k % std::size_t(n2) == 0 ? 0.0 : theta2_at(k); }

    /// Flat-index image of (θ1, θ2) → (−θ1, −θ2) mod 2π; an involution.
    std::vector<std::size_t> parity_permutation() const;

    friend bool operator==(const Grid2D& a, const Grid2D& b) { return a.n1 == b.n1 && a.n2 == b.n2; }
};

enum class Stencil {
    fourier,        ///< periodic Fourier differentiation (spectrally exact)
    paper_literal,  ///< Toeplitz rows with cot(mπ/(N+1)), kept for comparison only
};

const char* to_string(Stencil s);
Stencil stencil_from_string(const std::string& s);

/// First- and second-order periodic differentiation matrices on n points.
/// d1 is exactly skew-symmetric and dd1 exactly symmetric.
struct DiffOps {
    Eigen::MatrixXd d1;
    Eigen::MatrixXd dd1;
    Stencil stencil = Stencil::fourier;
};

DiffOps build_diff_ops(int n, Stencil stencil = Stencil::fourier);

struct HamiltonianMatrix {
    Eigen::MatrixXd entries;
    Grid2D grid;
    PendulumParams params;
    Stencil stencil = Stencil::fourier;

    std::size_t dim() const { return grid.dim(); }
};

struct AssemblyOptions {
    std::size_t memory_budget_bytes = std::size_t(2) << 30;
    Stencil stencil = Stencil::fourier;
    unsigned threads = 1;
};

/// Bytes needed to hold a dense dim×dim double matrix.
std::size_t dense_bytes(std::size_t dim);

/// Per-node diagonal coefficients of the discrete Hamiltonian.
struct NodeCoefficients {
    Eigen::VectorXd a;  ///< −ħ²/(2I1)
    Eigen::VectorXd b;  ///< −ħ²/(2I2)
    Eigen::VectorXd c;  ///< −ħ²·(1/I12)
    Eigen::VectorXd v;  ///< potential
};

NodeCoefficients sample_coefficients(const PendulumParams& params, const Grid2D& grid);

/// Σ ½(F·M + M·F) + diag(v) for arbitrary node coefficients.
/// Throws DimensionOverflow before allocating if the matrix exceeds the budget.
Eigen::MatrixXd assemble_operator(const Grid2D& grid, const NodeCoefficients& coeffs,
                                  const AssemblyOptions& opts = {});

/// H = Σ ½(F·M + M·F) + V over the three kinetic terms, with F the diagonal of
/// −ħ²/(2I1), −ħ²/(2I2), −ħ²/I12 and M = 𝔻1⊗I, I⊗𝔻2, D1⊗D2. Exactly symmetric.
/// Throws DimensionOverflow before allocating if the matrix exceeds the budget.
HamiltonianMatrix assemble_hamiltonian(const PendulumParams& params, const Grid2D& grid,
                                       const AssemblyOptions& opts = {});

/// (A ⊗ I) X for column vectors laid out on `grid` (A is n1×n1).
template <class Derived, class Scalar = typename Derived::Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> apply_axis1(
    const Eigen::MatrixXd& a, const Eigen::MatrixBase<Derived>& x, const Grid2D& grid) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Mat out(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        Mat col = x.col(c);
        Eigen::Map<const Mat> in(col.data(), grid.n2, grid.n1);
        Eigen::Map<Mat> res(out.col(c).data(), grid.n2, grid.n1);
        res.noalias() = in * a.transpose().template cast<Scalar>();
    }
    return out;
}

/// (I ⊗ B) X for column vectors laid out on `grid` (B is n2×n2).
template <class Derived, class Scalar = typename Derived::Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> apply_axis2(
    const Eigen::MatrixXd& b, const Eigen::MatrixBase<Derived>& x, const Grid2D& grid) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Mat out(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        Mat col = x.col(c);
        Eigen::Map<const Mat> in(col.data(), grid.n2, grid.n1);
        Eigen::Map<Mat> res(out.col(c).data(), grid.n2, grid.n1);
        res.noalias() = b.template cast<Scalar>() * in;
    }
    return out;
}

}  // namespace chaology
