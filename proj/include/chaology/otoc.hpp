#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chaology/eigensolve.hpp"
#include "chaology/fitting.hpp"

namespace chaology {

enum class OperatorKind { theta1, theta2, p1, p2, p1sq, p2sq };

const char* to_string(OperatorKind k);

/// ⟨Ψn|O|Ψk⟩ over the lowest M eigenstates. Momentum matrices are purely
/// imaginary; they are stored as their real coefficient with `imaginary` set,
/// so the operator equals i·entries.
struct OperatorMatrix {
    OperatorKind kind = OperatorKind::theta1;
    Eigen::MatrixXd entries;
    bool imaginary = false;
    std::size_t M = 0;

    Eigen::MatrixXcd complex_entries() const;
};

/// θ as grid multiplication, p = −iħ(D⊗I) or −iħ(I⊗D), p² = −ħ²(𝔻⊗I) or
/// −ħ²(I⊗𝔻), each sandwiched between the weighted eigenvectors.
/// Throws TruncationError if M exceeds reliable_count or the stored levels.
OperatorMatrix operator_matrix(const EigenDecomposition& eig, OperatorKind kind, std::size_t M,
                               std::size_t reliable_count);

enum class CommutatorForm {
    hermitian,      ///< ⟨W V² W⟩ + ⟨V W² V⟩ − 2 Re F = −⟨[W(t),V]²⟩
    paper_literal,  ///< 2⟨W V² W⟩ − 2F, complex for t ≠ 0
};

struct OtocSeries {
    std::vector<double> times;
    std::vector<std::complex<double>> F;
    std::vector<double> C;
    std::vector<double> C_imag;  ///< imaginary residue of C before it was discarded
    double beta = 0.0;
    double hbar = 1.0;
    std::size_t M = 0;
    double log_Z = 0.0;  ///< log Σ exp(−βEn)
    CommutatorForm form = CommutatorForm::hermitian;
};

struct OtocOptions {
    CommutatorForm form = CommutatorForm::hermitian;
    double hbar = 1.0;  ///< recorded for the MSS bound
    unsigned threads = 1;
};

/// Thermal F(t) = ⟨W(t) V W(t) V⟩_β and C(t), normalized by Z over the M
/// retained levels. `v_squared` is the matrix of V². Levels whose Boltzmann
/// weight underflows to zero are skipped, which is exact.
/// Throws OverflowGuard if the weights cannot be formed.
OtocSeries otoc_series(const OperatorMatrix& w, const OperatorMatrix& v,
                       const OperatorMatrix& v_squared, std::span<const double> energies,
                       double beta, std::span<const double> times, const OtocOptions& opts = {});

/// β-weighted Boltzmann probabilities relative to the lowest level.
std::vector<double> boltzmann_weights(std::span<const double> energies, double beta, double* log_z = nullptr);

enum class FitTarget { re_F, C };

struct OtocFit {
    double a = 0.0;
    double b = 0.0;
    double lambda_q = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t window = 0;
    double beta = 0.0;
    double rms = 0.0;
    double mss_bound = 0.0;         ///< 2π/(βħ)
    double saturation_ratio = 0.0;  ///< λ_q / bound, never clamped
    FitTarget target = FitTarget::re_F;
};

/// a + b·exp(λt) over the first `window` samples. Throws InsufficientData for
/// window < 4 and NoConvergence when the window is flat.
OtocFit fit_otoc_short_time(const OtocSeries& series, std::size_t window = 10,
                            FitTarget target = FitTarget::re_F);

struct MssReport {
    double lambda_q = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
    bool saturated = false;  ///< ratio within 1e-9 of 1
    bool violated = false;   ///< ratio above 1
    std::string summary;
};

MssReport mss_report(double lambda_q, double beta, double hbar = 1.0);
MssReport mss_report(const OtocFit& fit, double hbar = 1.0);

/// Ten (by default) uniformly spaced times from 0 with step fraction·τ, where
/// τ = 2π·sqrt((l1 + l2)/g) is the pendulum's quasi-period.
std::vector<double> short_time_grid(const PendulumParams& params, std::size_t samples = 10,
                                    double fraction = 0.005);

/// Max over the time grid of |F_M(t) − F_2M(t)| / max|F_2M|.
double truncation_change(const OtocSeries& coarse, const OtocSeries& fine);

}  // namespace chaology
