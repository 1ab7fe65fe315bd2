#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chaology/model.hpp"

namespace chaology {

/// Time-sampled classical evolution. `states` hold wrapped angles; `lifted`
/// holds the continuous (unwrapped) angles of the same samples.
struct Trajectory {
    std::vector<double> times;
    std::vector<PhaseState> states;
    std::vector<PhaseState> lifted;
    std::vector<double> energy;

    /// max_t |E(t) − E(0)| / max(1, |E(0)|)
    double max_relative_energy_drift() const;
};

struct IntegrationOptions {
    double t_max = 10.0;
    double dt = 0.01;   ///< sampling interval of the output
    double tol = 1e-8;  ///< target bound on relative energy drift
};

/// (θ̇1, θ̇2, ṗ1, ṗ2) from Hamilton's equations.
PhaseState equations_of_motion(const PendulumParams& params, const PhaseState& state);

/// Adaptive Dormand–Prince 5(4) with dense output, sampled at multiples of dt.
/// Throws StepFailure when the step controller cannot meet the tolerance.
Trajectory integrate(const PendulumParams& params, const PhaseState& initial,
                     const IntegrationOptions& opts);

/// 2π·sqrt((l1 + l2) / g): the dimensional balancing constant between
/// angle and momentum distances. Requires g > 0.
double default_balancing_constant(const PendulumParams& params);

/// Distance between two trajectories integrated with a shared step sequence.
struct DivergenceSeries {
    std::vector<double> times;
    std::vector<double> delta_omega;        ///< sqrt(|Δq|² + k⁴|Δp|²)
    std::vector<double> delta_omega_paper;  ///< signed sqrt of |q'|²+k⁴|p'|²−|q|²−k⁴|p|²
    double k = 1.0;
    double energy_drift_a = 0.0;
    double energy_drift_b = 0.0;
};

DivergenceSeries divergence(const PendulumParams& params, const PhaseState& ic_a,
                            const PhaseState& ic_b, double k,
                            const IntegrationOptions& opts);

enum class FitMode { full_window, until_order_one };

struct LyapunovFit {
    double a1 = 0.0;  ///< intercept of lg δΩ
    double a2 = 0.0;  ///< slope of lg δΩ
    double lambda_L = 0.0;  ///< a2·ln 10, the natural-log growth rate
    std::optional<double> t_star;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double rms = 0.0;
    std::size_t samples = 0;
};

/// Linear fit of lg δΩ(t). Throws InsufficientData if fewer than ten positive
/// samples fall in the window.
LyapunovFit fit_lyapunov(const DivergenceSeries& series, FitMode mode,
                         bool use_paper_literal = false);
/// Reference pair of nearby initial conditions:
/// The perturbed pair used for the classical chaos figures:
/// θ1 = 0.99π/2, θ2 = 0.99π, p = 0, and the same with θ2 += 10⁻⁶π.
std::pair<PhaseState, PhaseState> reference_initial_pair();

struct SweepRow {
    double g = 0.0;
    double lambda_L = 0.0;
    std::optional<double> t_star;
    double rms = 0.0;
    double energy_drift = 0.0;
    std::string error;  ///< empty on success
};

struct SweepOptions {
    IntegrationOptions integration;
    std::optional<double> k;  ///< per-g default when absent
    FitMode mode = FitMode::until_order_one;
    unsigned threads = 1;
};

/// One Lyapunov fit per g, rows in input order. A failing row records its
/// error and the sweep continues.
std::vector<SweepRow> sweep_g(const PendulumParams& base, const std::vector<double>& g_list,
                              const PhaseState& ic_a, const PhaseState& ic_b,
                              const SweepOptions& opts);

}  // namespace chaology
