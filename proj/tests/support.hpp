#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "chaology/eigensolve.hpp"
#include "chaology/model.hpp"

namespace testsupport {

inline std::optional<std::filesystem::path> cache_dir() {
    if (const char* d = std::getenv("CHAOLOGY_TEST_CACHE")) return std::filesystem::path(d);
    return std::nullopt;
}

/// Decompositions shared by all tests of one binary, and across binaries
/// through the on-disk cache.
inline const chaology::EigenDecomposition& decomposition(const chaology::PendulumParams& p, int n,
                                                         std::optional<std::size_t> k = std::nullopt) {
    static std::map<std::string, chaology::EigenDecomposition> memo;
    std::ostringstream key;
    key.precision(17);
    key << p.m1 << ',' << p.m2 << ',' << p.l1 << ',' << p.l2 << ',' << p.g << ',' << p.hbar << ',' << n << ','
        << (k ? long(*k) : -1L);
    auto it = memo.find(key.str());
    if (it != memo.end()) return it->second;
    chaology::SolveRequest req;
    req.params = p;
    req.n1 = req.n2 = n;
    req.k_lowest = k;
    return memo.emplace(key.str(), chaology::solve_cached(req, cache_dir()).eig).first->second;
}

/// Mass matrix from the Cartesian Jacobian: M = Jᵀ diag(m1, m1, m2, m2) J.
inline Eigen::Matrix2d mass_matrix(const chaology::PendulumParams& p, double t1, double t2) {
    Eigen::Matrix<double, 4, 2> j;
    // x1 = l1 sin t1, y1 = −l1 cos t1, x2 = x1 + l2 sin t2, y2 = y1 − l2 cos t2
    j << p.l1 * std::cos(t1), 0.0,
         p.l1 * std::sin(t1), 0.0,
         p.l1 * std::cos(t1), p.l2 * std::cos(t2),
         p.l1 * std::sin(t1), p.l2 * std::sin(t2);
    Eigen::Vector4d m(p.m1, p.m1, p.m2, p.m2);
    return j.transpose() * m.asDiagonal() * j;
}

/// Potential from the heights of the two masses, zero at the hanging rest state.
inline double potential_oracle(const chaology::PendulumParams& p, double t1, double t2) {
    const double y1 = -p.l1 * std::cos(t1);
    const double y2 = y1 - p.l2 * std::cos(t2);
    return p.m1 * p.g * (y1 + p.l1) + p.m2 * p.g * (y2 + p.l1 + p.l2);
}

/// Legendre transform: H = p·q̇ − L with q̇ = M⁻¹p and L = ½q̇ᵀMq̇ − V.
inline double hamiltonian_oracle(const chaology::PendulumParams& p, const chaology::PhaseState& s) {
    const Eigen::Matrix2d m = mass_matrix(p, s.theta1, s.theta2);
    const Eigen::Vector2d mom(s.p1, s.p2);
    const Eigen::Vector2d qdot = m.inverse() * mom;
    const double lagrangian = 0.5 * qdot.dot(m * qdot) - potential_oracle(p, s.theta1, s.theta2);
    return mom.dot(qdot) - lagrangian;
}

}  // namespace testsupport
