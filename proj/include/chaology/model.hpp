#pragma once

#include <array>
#include <numbers>

namespace chaology {

/// Physical parameters of the double rod pendulum in natural units.
struct PendulumParams {
    double m1 = 1.0;
    double m2 = 1.0;
    double l1 = 1.0;
    double l2 = 1.0;
    double g = 1.0;
    double hbar = 1.0;

    /// Throws InvalidArgument unless m1,m2,l1,l2,hbar > 0 and g >= 0.
    void validate() const;

    friend bool operator==(const PendulumParams&, const PendulumParams&) = default;
};

/// Canonical phase-space point (θ1, θ2, p1, p2).
struct PhaseState {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;

    friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

/// Wraps an angle to [-π, π).
double wrap_angle(double theta);

/// Returns the state with both angles wrapped to [-π, π); momenta untouched.
PhaseState wrapped(const PhaseState& s);

/// Inverse-inertia coefficients of the kinetic form at one configuration,
/// plus the potential there. K = inv2I1·p1² + inv2I2·p2² + invI12·p1·p2.
struct HamiltonianCoefficients {
    double inv2I1 = 0.0;
    double inv2I2 = 0.0;
    double invI12 = 0.0;
    double V = 0.0;
};

/// Derivatives of the coefficients with respect to Δ = θ1 − θ2 and of V with
/// respect to each angle. Used by the equations of motion.
struct CoefficientGradients {
    double d_inv2I1 = 0.0;
    double d_inv2I2 = 0.0;
    double d_invI12 = 0.0;
    double dV_dtheta1 = 0.0;
    double dV_dtheta2 = 0.0;
};

double potential_energy(const PendulumParams& p, double theta1, double theta2);

/// 1/(2I1), 1/(2I2), 1/I12 and V. The cross coefficient is evaluated as
/// −cosΔ / (l1 l2 (m1 + m2 sin²Δ)), which stays finite at Δ = ±π/2.
HamiltonianCoefficients inertia_coefficients(const PendulumParams& p, double theta1,
                                             double theta2);

CoefficientGradients coefficient_gradients(const PendulumParams& p, double theta1,
                                           double theta2);

/// Kinetic part of H only.
double kinetic_energy(const PendulumParams& p, const PhaseState& s);

double hamiltonian_value(const PendulumParams& p, const PhaseState& s);

}  // namespace chaology
