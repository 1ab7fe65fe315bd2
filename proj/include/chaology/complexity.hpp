#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "chaology/eigensolve.hpp"
#include "chaology/fitting.hpp"

namespace chaology {

enum class AngleScaling {
    unscaled,      ///< ξ = (θ1, θ2, k·p1, k·p2)
    divided_by_k,  ///< ξ = (θ1/k, θ2/k, k·p1, k·p2)
};

struct ComplexityConfig {
    double epsilon = 1e-6;
    std::optional<double> ell_eff;  ///< l1 + l2 when absent
    std::optional<double> k;        ///< 2π·sqrt(ell_eff/g) when absent
    std::optional<std::size_t> M;   ///< eigenstates of H′ used for the evolution; all when absent
    bool centered = false;
    AngleScaling angle_scaling = AngleScaling::unscaled;
    unsigned threads = 1;

    double resolved_ell_eff(const PendulumParams& p) const;
    double resolved_k(const PendulumParams& p) const;
};

/// Rod lengths l1·(1+ε), l2·(1−ε); requires |ε| < 1.
PendulumParams perturbed_hamiltonian(const PendulumParams& params, double epsilon);

/// e^{iH′t}e^{−iHt}|ψ⟩ on the grid, expanding ψ in the eigenbasis of H and
/// then in the first `M` eigenstates of H′. Throws GridMismatch.
Eigen::VectorXcd target_state(const EigenDecomposition& eig_h, const EigenDecomposition& eig_hp,
                              const Eigen::VectorXcd& reference, double t,
                              std::optional<std::size_t> M = std::nullopt);

/// Same, with the ground state of H as reference.
Eigen::VectorXcd target_state(const EigenDecomposition& eig_h, const EigenDecomposition& eig_hp,
                              double t, std::optional<std::size_t> M = std::nullopt);

/// Σ_k |ψ(k)|²·weight.
double grid_norm(const Eigen::VectorXcd& state, const Grid2D& grid);

struct CovarianceOptions {
    double k = 1.0;
    double hbar = 1.0;
    bool centered = false;
    AngleScaling angle_scaling = AngleScaling::unscaled;
    Stencil stencil = Stencil::fourier;
};

/// G_ij = Re⟨ψ|½{ξi, ξj}|ψ⟩, formed as the real part of the Gram matrix of the
/// vectors ξi|ψ⟩ so that it is symmetric PSD by construction.
Eigen::Matrix4d covariance(const Eigen::VectorXcd& state, const Grid2D& grid,
                           const CovarianceOptions& opts);

struct ComplexityValue {
    double value = 0.0;
    double condition_reference = 0.0;
    Eigen::VectorXd deltas;  ///< eigenvalues of G_R^{−1/2} G_T G_R^{−1/2}
};

/// (1/(2√2))·sqrt(Σ ln²δi). Works for any square size.
/// Throws SingularReference if cond(G_R) > 1e12, NonPositiveDelta if some δ ≤ 0.
ComplexityValue complexity_value(const Eigen::MatrixXd& g_ref, const Eigen::MatrixXd& g_target);

struct ComplexitySeries {
    std::vector<double> times;
    std::vector<double> C;
    LineFit linear_fit;  ///< over the last half of the samples
    double fit_t_lo = 0.0;
    double fit_t_hi = 0.0;
    double max_norm_error = 0.0;  ///< max_t |‖ψ′(t)‖² − 1|
    double min_delta = 0.0;
    double k = 0.0;
    double ell_eff = 0.0;
    double epsilon = 0.0;
    Eigen::Matrix4d reference_covariance = Eigen::Matrix4d::Zero();
    /// ⟨θi⁴⟩/(3⟨θi²⟩²) − 1 of the reference state, per angle
    std::vector<double> gaussianity_deficit;
};

/// 𝒞(t) between the ground state of H and its image under e^{iH′t}e^{−iHt}.
/// Requires times[0] == 0. Throws TruncationError when the evolved state's norm
/// drifts by more than 1e-8.
ComplexitySeries complexity_series(const EigenDecomposition& eig_h, const EigenDecomposition& eig_hp,
                                   const ComplexityConfig& config, std::span<const double> times);

/// Last-half least-squares line of 𝒞(t).
LineFit last_half_fit(std::span<const double> times, std::span<const double> values,
                      double* t_lo = nullptr, double* t_hi = nullptr);

/// θ2 frozen at 0: a single rod of mass m, length l on an n-point grid, with
/// the length perturbed to l(1+ε). 2×2 covariance over (θ, k·p).
ComplexitySeries single_pendulum_series(double m, double l, double g, double hbar, int n,
                                        const ComplexityConfig& config, std::span<const double> times);

}  // namespace chaology
