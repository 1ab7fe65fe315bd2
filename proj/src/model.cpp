#include "chaology/model.hpp"

#include <cmath>
#include <string>

#include "chaology/error.hpp"

namespace chaology {

void PendulumParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw InvalidArgument(std::string(name) + " must be positive and finite");
    };
    positive(m1, "m1");
    positive(m2, "m2");
    positive(l1, "l1");
    positive(l2, "l2");
    positive(hbar, "hbar");
    if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidArgument("g must be non-negative");
}

double wrap_angle(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(theta + std::numbers::pi, two_pi);
    if (w < 0.0) w += two_pi;
    w -= std::numbers::pi;
    // fmod can land exactly on +π after the shift for inputs just below −π
    if (w >= std::numbers::pi) w -= two_pi;
    return w;
}

PhaseState wrapped(const PhaseState& s) {
    return {wrap_angle(s.theta1), wrap_angle(s.theta2), s.p1, s.p2};
}

double potential_energy(const PendulumParams& p, double theta1, double theta2) {
    const double s1 = std::sin(0.5 * theta1);
    const double s2 = std::sin(0.5 * theta2);
    return 2.0 * p.m1 * p.g * p.l1 * s1 * s1 +
           2.0 * p.m2 * p.g * (p.l1 * s1 * s1 + p.l2 * s2 * s2);
}

HamiltonianCoefficients inertia_coefficients(const PendulumParams& p, double theta1,
                                             double theta2) {
    const double delta = theta1 - theta2;
    const double s = std::sin(delta);
    const double c = std::cos(delta);
    const double q = p.m1 + p.m2 * s * s;

    HamiltonianCoefficients out;
    // I1 = l1² q,  I2 = m2 l2² q / (m1 + m2)
    out.inv2I1 = 1.0 / (2.0 * p.l1 * p.l1 * q);
    out.inv2I2 = (p.m1 + p.m2) / (2.0 * p.m2 * p.l2 * p.l2 * q);
    out.invI12 = -c / (p.l1 * p.l2 * q);
    out.V = potential_energy(p, theta1, theta2);
    return out;
}

CoefficientGradients coefficient_gradients(const PendulumParams& p, double theta1,
                                           double theta2) {
    const double delta = theta1 - theta2;
    const double s = std::sin(delta);
    const double c = std::cos(delta);
    const double q = p.m1 + p.m2 * s * s;
    const double dq = 2.0 * p.m2 * s * c;
    const double q2 = q * q;

    CoefficientGradients out;
    out.d_inv2I1 = -dq / (2.0 * p.l1 * p.l1 * q2);
    out.d_inv2I2 = -(p.m1 + p.m2) * dq / (2.0 * p.m2 * p.l2 * p.l2 * q2);
    out.d_invI12 = (s * q + c * dq) / (p.l1 * p.l2 * q2);
    out.dV_dtheta1 = (p.m1 + p.m2) * p.g * p.l1 * std::sin(theta1);
    out.dV_dtheta2 = p.m2 * p.g * p.l2 * std::sin(theta2);
    return out;
}

double kinetic_energy(const PendulumParams& p, const PhaseState& st) {
    const auto k = inertia_coefficients(p, st.theta1, st.theta2);
    return k.inv2I1 * st.p1 * st.p1 + k.inv2I2 * st.p2 * st.p2 + k.invI12 * st.p1 * st.p2;
}

double hamiltonian_value(const PendulumParams& p, const PhaseState& st) {
    const auto k = inertia_coefficients(p, st.theta1, st.theta2);
    return k.inv2I1 * st.p1 * st.p1 + k.inv2I2 * st.p2 * st.p2 +
           k.invI12 * st.p1 * st.p2 + k.V;
}

}  // namespace chaology
