#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "chaology/complexity.hpp"
#include "chaology/error.hpp"
#include "support.hpp"

using namespace chaology;
using cd = std::complex<double>;
using std::numbers::pi;

namespace {

PendulumParams field(double g) {
    PendulumParams p;
    p.g = g;
    return p;
}

EigenDecomposition small_solve(const PendulumParams& p, int n = 20) {
    return solve(assemble_hamiltonian(p, Grid2D::uniform(n, n)));
}

// ψ(θ1, θ2) ∝ exp(−θ1²/(4s1) − θ2²/(4s2)), so that ⟨θi²⟩ = si.
Eigen::VectorXcd gaussian(const Grid2D& g, double s1, double s2) {
    Eigen::VectorXcd psi(Eigen::Index(g.dim()));
    for (std::size_t k = 0; k < g.dim(); ++k) {
        const double a = g.theta1_at(k), b = g.theta2_at(k);
        psi[Eigen::Index(k)] = std::exp(-a * a / (4 * s1) - b * b / (4 * s2));
    }
    return psi / std::sqrt(grid_norm(psi, g));
}

std::vector<double> linspace(double hi, int n) {
    std::vector<double> t;
    for (int i = 0; i < n; ++i) t.push_back(hi * i / (n - 1));
    return t;
}

}  // namespace

TEST(Complexity, PerturbedHamiltonian) {
    PendulumParams p;
    EXPECT_EQ(perturbed_hamiltonian(p, 0.0), p);
    const auto q = perturbed_hamiltonian(p, 1e-6);
    EXPECT_DOUBLE_EQ(q.l1, 1.000001);
    EXPECT_DOUBLE_EQ(q.l2, 0.999999);
    EXPECT_EQ(q.m1, p.m1);
    EXPECT_EQ(q.g, p.g);
    p.l1 = 2.0;
    p.l2 = 4.0;
    const auto r = perturbed_hamiltonian(p, 0.5);
    EXPECT_DOUBLE_EQ(r.l1, 3.0);
    EXPECT_DOUBLE_EQ(r.l2, 2.0);
    EXPECT_THROW(perturbed_hamiltonian(p, 1.0), InvalidArgument);
}

TEST(Complexity, TargetStateAtTimeZeroIsReference) {
    const auto h = small_solve(field(10.0));
    const auto hp = small_solve(perturbed_hamiltonian(field(10.0), 1e-3));
    const Eigen::VectorXcd psi = target_state(h, hp, 0.0);
    const Eigen::VectorXcd ref = h.eigenvectors.col(0).cast<cd>();
    EXPECT_LT((psi - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Complexity, UnperturbedEvolutionIsAPhase) {
    const auto h = small_solve(field(10.0));
    const Eigen::VectorXcd ref = h.eigenvectors.col(0).cast<cd>();
    for (double t : {0.5, 3.0, 17.0}) {
        const Eigen::VectorXcd psi = target_state(h, h, t);
        EXPECT_NEAR(std::abs(ref.dot(psi)) * h.grid.weight, 1.0, 1e-8);
        EXPECT_NEAR(grid_norm(psi, h.grid), 1.0, 1e-8);
    }
}

TEST(Complexity, DeviationScalesWithEpsilon) {
    const auto p = field(10.0);
    const auto h = small_solve(p);
    const Eigen::VectorXcd ref = h.eigenvectors.col(0).cast<cd>();
    auto deviation = [&](double eps, double t) {
        const auto hp = small_solve(perturbed_hamiltonian(p, eps));
        const Eigen::VectorXcd psi = target_state(h, hp, t);
        EXPECT_NEAR(grid_norm(psi, h.grid), 1.0, 1e-8);
        return std::sqrt(grid_norm(psi - ref, h.grid));
    };
    for (double t : {0.05, 0.1}) {
        const double a = deviation(2e-4, t), b = deviation(1e-4, t);
        EXPECT_NEAR(a / b, 2.0, 0.05) << t;
        EXPECT_NEAR(deviation(1e-4, 2 * t) / b, 2.0, 0.2) << t;
    }
}

TEST(Complexity, TargetStateGridMismatch) {
    const auto a = small_solve(field(10.0), 12);
    const auto b = small_solve(field(10.0), 14);
    EXPECT_THROW(target_state(a, b, 1.0), GridMismatch);
    EXPECT_THROW(target_state(a, a, Eigen::VectorXcd::Zero(5), 1.0), GridMismatch);
}

TEST(Complexity, CovarianceIsSymmetricPsd) {
    const auto g = Grid2D::uniform(16, 14);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    CovarianceOptions o;
    o.k = 2.3;
    o.hbar = 0.7;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXcd psi(Eigen::Index(g.dim()));
        for (Eigen::Index k = 0; k < psi.size(); ++k) psi[k] = cd(nd(rng), nd(rng));
        psi /= std::sqrt(grid_norm(psi, g));
        for (bool centered : {false, true}) {
            o.centered = centered;
            const Eigen::Matrix4d c = covariance(psi, g, o);
            EXPECT_TRUE(c == c.transpose());
            EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(c).eigenvalues().minCoeff(), -1e-10);
        }
    }
    EXPECT_THROW(covariance(Eigen::VectorXcd::Zero(3), g, o), GridMismatch);
}

TEST(Complexity, StationaryStateHasNoPositionMomentumCorrelation) {
    const auto h = small_solve(field(10.0), 24);
    CovarianceOptions o;
    o.k = 2 * pi * std::sqrt(2.0 / 10.0);
    const Eigen::Matrix4d c = covariance(h.eigenvectors.col(0).cast<cd>(), h.grid, o);
    EXPECT_LE(c.topRightCorner(2, 2).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(c.bottomLeftCorner(2, 2).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Complexity, GaussianMomentsOracle) {
    const auto g = Grid2D::uniform(64, 64);
    const double w1 = 10.0, w2 = 15.0, k = 1.7;
    const Eigen::VectorXcd psi = gaussian(g, 1.0 / (2 * w1), 1.0 / (2 * w2));
    CovarianceOptions o;
    o.k = k;
    const Eigen::Matrix4d c = covariance(psi, g, o);
    Eigen::Vector4d oracle(1.0 / (2 * w1), 1.0 / (2 * w2), k * k * w1 / 2, k * k * w2 / 2);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(c(i, i), oracle[i], 1e-8 * oracle[i]);
    EXPECT_LE((c - Eigen::Matrix4d(oracle.asDiagonal())).cwiseAbs().maxCoeff(), 1e-8);
    o.angle_scaling = AngleScaling::divided_by_k;
    EXPECT_NEAR(covariance(psi, g, o)(0, 0), oracle[0] / (k * k), 1e-10);
}

TEST(Complexity, ValueOfScaledAndIdenticalCovariances) {
    Eigen::Matrix4d gr;
    gr << 2, 0.3, 0.1, 0, 0.3, 1, 0, 0.2, 0.1, 0, 3, 0.4, 0, 0.2, 0.4, 1.5;
    EXPECT_NEAR(complexity_value(gr, gr).value, 0.0, 1e-12);
    for (double c : {1.5, 0.2, 7.0})
        EXPECT_NEAR(complexity_value(gr, c * gr).value, std::abs(std::log(c)) / std::sqrt(2.0), 1e-12);
}

TEST(Complexity, ValueErrors) {
    Eigen::Matrix2d sing;
    sing << 1, 0, 0, 1e-14;
    EXPECT_THROW(complexity_value(sing, Eigen::Matrix2d::Identity()), SingularReference);
    Eigen::Matrix2d neg;
    neg << 1, 0, 0, -1;
    EXPECT_THROW(complexity_value(Eigen::Matrix2d::Identity(), neg), NonPositiveDelta);
    EXPECT_THROW(complexity_value(Eigen::Matrix2d::Identity(), Eigen::Matrix3d::Identity()), InvalidArgument);
}

TEST(Complexity, SqueezedStateClosedForm) {
    // single mode, ħ = 1: vacuum (½, ½); squeezed by r: (e^{−2r}/2, e^{2r}/2), any
    // phase-space rotation. The covariance complexity is r.
    for (double r : {0.1, 0.5, 1.3})
        for (double phi : {0.0, 0.4}) {
            Eigen::Matrix2d rot;
            rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
            const Eigen::Matrix2d gt = rot * Eigen::Vector2d(std::exp(-2 * r) / 2, std::exp(2 * r) / 2).asDiagonal() *
                                       rot.transpose();
            EXPECT_NEAR(complexity_value(0.5 * Eigen::Matrix2d::Identity(), gt).value, r, 1e-12);
        }
}

TEST(Complexity, SqueezedWavefunctionThroughCovariance) {
    const double hbar = 0.05, r = 0.3;
    const auto g = Grid2D::uniform(96, 64);
    CovarianceOptions o;
    o.k = 1.0;
    o.hbar = hbar;
    const Eigen::Matrix4d gr = covariance(gaussian(g, hbar / 2, hbar / 2), g, o);
    const Eigen::Matrix4d gt = covariance(gaussian(g, std::exp(-2 * r) * hbar / 2, hbar / 2), g, o);
    EXPECT_NEAR(complexity_value(gr, gt).value, r, 1e-6);
}

TEST(Complexity, PermutationInvariance) {
    Eigen::Matrix4d gr, gt;
    gr << 2, 0.3, 0.1, 0, 0.3, 1, 0, 0.2, 0.1, 0, 3, 0.4, 0, 0.2, 0.4, 1.5;
    gt << 2.2, 0.1, 0.0, 0.1, 0.1, 0.9, 0.1, 0.2, 0.0, 0.1, 3.3, 0.3, 0.1, 0.2, 0.3, 1.4;
    Eigen::Matrix4d swap = Eigen::Matrix4d::Zero();
    swap(0, 1) = swap(1, 0) = swap(2, 3) = swap(3, 2) = 1.0;
    const double a = complexity_value(gr, gt).value;
    const double b = complexity_value(swap * gr * swap.transpose(), swap * gt * swap.transpose()).value;
    EXPECT_NEAR(a, b, 1e-8);
}

TEST(Complexity, SeriesStartsAtZeroAndStaysNonNegative) {
    const auto p = field(10.0);
    const auto h = small_solve(p, 24);
    ComplexityConfig cfg;
    const auto hp = small_solve(perturbed_hamiltonian(p, cfg.epsilon), 24);
    const auto t = linspace(10.0, 41);
    const auto s = complexity_series(h, hp, cfg, t);
    ASSERT_EQ(s.C.size(), t.size());
    EXPECT_LE(s.C[0], 1e-8);
    for (double c : s.C) EXPECT_GE(c, 0.0);
    EXPECT_GT(s.min_delta, 0.0);
    EXPECT_LE(s.max_norm_error, 1e-8);
    EXPECT_NEAR(s.k, 2 * pi * std::sqrt(0.2), 1e-12);
    EXPECT_EQ(s.ell_eff, 2.0);
    EXPECT_EQ(s.fit_t_lo, t[20]);
    EXPECT_EQ(s.fit_t_hi, 10.0);
    ASSERT_EQ(s.gaussianity_deficit.size(), 2u);
    for (double d : s.gaussianity_deficit) EXPECT_TRUE(std::isfinite(d));
    EXPECT_LE(s.reference_covariance.topRightCorner(2, 2).cwiseAbs().maxCoeff(), 1e-8);

    ComplexityConfig threaded = cfg;
    threaded.threads = 3;
    EXPECT_EQ(complexity_series(h, hp, threaded, t).C, s.C);
}

TEST(Complexity, HalvingEpsilonShrinksComplexity) {
    const auto p = field(10.0);
    const auto h = small_solve(p, 24);
    const auto t = linspace(5.0, 26);
    ComplexityConfig a, b;
    a.epsilon = 1e-4;
    b.epsilon = 0.5e-4;
    const auto sa = complexity_series(h, small_solve(perturbed_hamiltonian(p, a.epsilon), 24), a, t);
    const auto sb = complexity_series(h, small_solve(perturbed_hamiltonian(p, b.epsilon), 24), b, t);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_LE(sb.C[i], sa.C[i] + 1e-6);
}

TEST(Complexity, SeriesPreconditions) {
    const auto h = small_solve(field(10.0), 12);
    ComplexityConfig cfg;
    const std::vector<double> late{1, 2, 3, 4}, few{0, 1, 2};
    EXPECT_THROW(complexity_series(h, h, cfg, late), InvalidArgument);
    EXPECT_THROW(complexity_series(h, h, cfg, few), InsufficientData);
    ComplexityConfig tiny = cfg;
    tiny.M = 1;
    const auto hp = small_solve(perturbed_hamiltonian(field(10.0), 0.05), 12);
    EXPECT_THROW(complexity_series(h, hp, tiny, linspace(1.0, 5)), TruncationError);
    ComplexityConfig bad = cfg;
    bad.k = -1.0;
    EXPECT_THROW(complexity_series(h, h, bad, linspace(1.0, 5)), InvalidArgument);
}

TEST(Complexity, SinglePendulumMode) {
    ComplexityConfig cfg;
    cfg.epsilon = 1e-4;
    const auto t = linspace(20.0, 81);
    const auto s = single_pendulum_series(1.0, 1.0, 10.0, 1.0, 64, cfg, t);
    ASSERT_EQ(s.C.size(), t.size());
    EXPECT_LE(s.C[0], 1e-8);
    double peak = 0.0;
    for (double c : s.C) {
        EXPECT_GE(c, 0.0);
        peak = std::max(peak, c);
    }
    EXPECT_GT(peak, 0.0);
    EXPECT_LE(s.max_norm_error, 1e-8);
    EXPECT_THROW(single_pendulum_series(0.0, 1.0, 10.0, 1.0, 64, cfg, t), InvalidArgument);
}
