#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "chaology/error.hpp"
#include "chaology/levelstats.hpp"
#include "chaology/otoc.hpp"
#include "support.hpp"

using namespace chaology;
using cd = std::complex<double>;

namespace {

PendulumParams strong_field() {
    PendulumParams p;
    p.g = 10.0;
    return p;
}

const EigenDecomposition& small() {
    static const EigenDecomposition eig = solve(assemble_hamiltonian(strong_field(), Grid2D::uniform(24, 24)));
    return eig;
}

// Tr(ρ W(t) V W(t) V) and −Tr(ρ [W(t), V]²) with full complex matrices.
std::pair<cd, double> trace_oracle(const Eigen::MatrixXcd& w, const Eigen::MatrixXcd& v, const Eigen::VectorXd& e,
                                   double beta, double t) {
    const Eigen::Index m = w.rows();
    Eigen::VectorXcd ph(m);
    Eigen::VectorXd rho(m);
    for (Eigen::Index n = 0; n < m; ++n) {
        ph[n] = std::exp(cd(0, e[n] * t));
        rho[n] = std::exp(-beta * (e[n] - e[0]));
    }
    rho /= rho.sum();
    const Eigen::MatrixXcd wt = ph.asDiagonal() * w * ph.conjugate().asDiagonal();
    const Eigen::MatrixXcd comm = wt * v - v * wt;
    const Eigen::MatrixXcd four = wt * v * wt * v;
    const Eigen::MatrixXcd sq = comm * comm;
    cd f = 0.0, c = 0.0;
    for (Eigen::Index n = 0; n < m; ++n) {
        f += rho[n] * four(n, n);
        c -= rho[n] * sq(n, n);
    }
    return {f, c.real()};
}

}  // namespace

TEST(Otoc, OperatorMatrixSymmetries) {
    const auto& eig = small();
    const std::size_t M = 80;
    for (auto k : {OperatorKind::theta1, OperatorKind::theta2, OperatorKind::p1sq, OperatorKind::p2sq}) {
        const auto op = operator_matrix(eig, k, M, M);
        EXPECT_FALSE(op.imaginary);
        EXPECT_LE((op.entries - op.entries.transpose()).cwiseAbs().maxCoeff(), 1e-8) << to_string(k);
    }
    for (auto k : {OperatorKind::p1, OperatorKind::p2}) {
        const auto op = operator_matrix(eig, k, M, M);
        EXPECT_TRUE(op.imaginary);
        EXPECT_LE((op.entries + op.entries.transpose()).cwiseAbs().maxCoeff(), 1e-8);
        const Eigen::MatrixXcd z = op.complex_entries();
        EXPECT_LE((z - z.adjoint()).cwiseAbs().maxCoeff(), 1e-8);
        for (std::size_t n = 0; n < M; ++n) EXPECT_NEAR(op.entries(Eigen::Index(n), Eigen::Index(n)), 0.0, 1e-8);
    }
    for (auto k : {OperatorKind::p1sq, OperatorKind::p2sq}) {
        const auto op = operator_matrix(eig, k, M, M);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (op.entries + op.entries.transpose()));
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
    }
}

TEST(Otoc, ThetaIsParityOdd) {
    const auto& eig = small();
    const std::size_t M = 60;
    const auto split = split_parity(eig, M);
    ASSERT_TRUE(split.unclassified.empty());
    const auto op = operator_matrix(eig, OperatorKind::theta1, M, M);
    for (std::size_t a = 0; a < M; ++a)
        for (std::size_t b = 0; b < M; ++b)
            if (split.parity[a] * split.parity[b] > 0)
                EXPECT_NEAR(op.entries(Eigen::Index(a), Eigen::Index(b)), 0.0, 1e-8);
}

TEST(Otoc, SecondDerivativeMatrixApproachesSquaredMomentum) {
    const auto& eig = small();
    auto gap = [&](std::size_t M) {
        const auto p = operator_matrix(eig, OperatorKind::p1, M, M);
        const auto p2 = operator_matrix(eig, OperatorKind::p1sq, M, M);
        const Eigen::MatrixXd prod = -(p.entries * p.entries);
        const Eigen::Index h = 40;
        return (p2.entries.topLeftCorner(h, h) - prod.topLeftCorner(h, h)).norm();
    };
    const double a = gap(80), b = gap(160), c = gap(320);
    EXPECT_LT(b, a);
    EXPECT_LT(c, b);
}

TEST(Otoc, TruncationErrors) {
    const auto& eig = small();
    EXPECT_THROW(operator_matrix(eig, OperatorKind::theta1, 50, 40), TruncationError);
    EXPECT_THROW(operator_matrix(eig, OperatorKind::theta1, eig.count() + 1, eig.count() + 1), TruncationError);
    EXPECT_THROW(operator_matrix(eig, OperatorKind::theta1, 0, 10), InvalidArgument);
}

TEST(Otoc, MatchesComplexTraceOracle) {
    const auto& eig = small();
    const std::size_t M = 70;
    const auto w = operator_matrix(eig, OperatorKind::theta1, M, M);
    const auto v = operator_matrix(eig, OperatorKind::p1, M, M);
    const auto v2 = operator_matrix(eig, OperatorKind::p1sq, M, M);
    const Eigen::VectorXd e = eig.eigenvalues.head(Eigen::Index(M));
    const std::vector<double> times{0.0, 0.3, 1.1, 2.5};
    for (double beta : {0.2, 1.0, 5.0}) {
        const auto s = otoc_series(w, v, v2, std::span(e.data(), M), beta, times);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const auto [f, c] = trace_oracle(w.complex_entries(), v.complex_entries(), e, beta, times[i]);
            EXPECT_LT(std::abs(s.F[i] - f), 1e-9 * std::max(1.0, std::abs(f)));
            // the series uses the p² matrix where the oracle squares the truncated p
            const auto [f2, c2] = trace_oracle(w.complex_entries(), v.complex_entries(), e, beta, times[i]);
            (void)f2;
            (void)c2;
        }
    }
}

TEST(Otoc, HermitianCommutatorUsesSquaredMatrix) {
    // with V² taken as the exact product of the truncated V, the Hermitian
    // form is −Tr ρ[W(t), V]² exactly
    const auto& eig = small();
    const std::size_t M = 60;
    const auto w = operator_matrix(eig, OperatorKind::theta1, M, M);
    const auto v = operator_matrix(eig, OperatorKind::p1, M, M);
    OperatorMatrix vv = v;
    vv.kind = OperatorKind::p1sq;
    vv.imaginary = false;
    vv.entries = -(v.entries * v.entries);
    const Eigen::VectorXd e = eig.eigenvalues.head(Eigen::Index(M));
    const std::vector<double> times{0.0, 0.7, 3.0};
    const auto s = otoc_series(w, v, vv, std::span(e.data(), M), 0.5, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto [f, c] = trace_oracle(w.complex_entries(), v.complex_entries(), e, 0.5, times[i]);
        EXPECT_NEAR(s.C[i], c, 1e-9 * std::max(1.0, std::abs(c)));
    }
}

TEST(Otoc, ZeroTemperatureMatchesStateEvolution) {
    const auto& eig = small();
    const std::size_t M = 70;
    const auto w = operator_matrix(eig, OperatorKind::theta1, M, M).complex_entries();
    const auto v = operator_matrix(eig, OperatorKind::p1, M, M).complex_entries();
    const auto wm = operator_matrix(eig, OperatorKind::theta1, M, M);
    const auto vm = operator_matrix(eig, OperatorKind::p1, M, M);
    const auto v2 = operator_matrix(eig, OperatorKind::p1sq, M, M);
    const Eigen::VectorXd e = eig.eigenvalues.head(Eigen::Index(M));
    const std::vector<double> times{0.0, 0.4, 1.3};
    const auto s = otoc_series(wm, vm, v2, std::span(e.data(), M), 1e4, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        auto evolve = [&](Eigen::VectorXcd x, double sign) {
            for (Eigen::Index n = 0; n < x.size(); ++n) x[n] *= std::exp(cd(0, sign * e[n] * t));
            return x;
        };
        // W(t)|x⟩ = e^{iHt} W e^{−iHt}|x⟩
        auto wt = [&](const Eigen::VectorXcd& x) { return evolve(w * evolve(x, -1.0), +1.0); };
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index(M));
        psi[0] = 1.0;
        const Eigen::VectorXcd chain = wt(v * wt(v * psi));
        EXPECT_LT(std::abs(s.F[i] - chain[0]), 1e-10);
    }
}

TEST(Otoc, StructuralInvariants) {
    const auto& eig = small();
    const std::size_t M = 80;
    const auto w = operator_matrix(eig, OperatorKind::theta1, M, M);
    const auto v = operator_matrix(eig, OperatorKind::p1, M, M);
    const auto v2 = operator_matrix(eig, OperatorKind::p1sq, M, M);
    const Eigen::VectorXd e = eig.eigenvalues.head(Eigen::Index(M));
    std::vector<double> times, neg;
    for (int i = 0; i <= 40; ++i) {
        times.push_back(0.125 * i);
        neg.push_back(-0.125 * i);
    }
    for (double beta : {0.125, 1.0, 10.0}) {
        OtocOptions o;
        o.threads = 2;
        const auto s = otoc_series(w, v, v2, std::span(e.data(), M), beta, times, o);
        const auto r = otoc_series(w, v, v2, std::span(e.data(), M), beta, neg);
        double cmax = 0.0;
        for (double c : s.C) cmax = std::max(cmax, std::abs(c));
        EXPECT_LE(std::abs(s.F[0].imag()), 1e-8 * std::abs(s.F[0]));
        for (std::size_t i = 0; i < times.size(); ++i) {
            EXPECT_LT(std::abs(r.F[i] - std::conj(s.F[i])), 1e-10 * std::max(1.0, std::abs(s.F[i])));
            EXPECT_GE(s.C[i], -1e-6 * cmax);
            EXPECT_LE(std::abs(s.C_imag[i]), 1e-8 * cmax);
        }
        const auto single = otoc_series(w, v, v2, std::span(e.data(), M), beta, times);
        EXPECT_EQ(single.F, s.F);
    }
}

TEST(Otoc, PaperLiteralFormKeepsAnImaginaryResidue) {
    const auto& eig = small();
    const std::size_t M = 80;
    const auto w = operator_matrix(eig, OperatorKind::theta1, M, M);
    const auto v = operator_matrix(eig, OperatorKind::p1, M, M);
    const auto v2 = operator_matrix(eig, OperatorKind::p1sq, M, M);
    const Eigen::VectorXd e = eig.eigenvalues.head(Eigen::Index(M));
    OtocOptions o;
    o.form = CommutatorForm::paper_literal;
    const std::vector<double> times{0.0, 0.5, 1.0};
    const auto lit = otoc_series(w, v, v2, std::span(e.data(), M), 1.0, times, o);
    const auto her = otoc_series(w, v, v2, std::span(e.data(), M), 1.0, times);
    EXPECT_LT(std::abs(lit.C_imag[0]), 1e-8 * std::abs(lit.C[0]));
    EXPECT_GT(std::abs(lit.C_imag[2]), 1e-6 * std::abs(her.C[2]));
    EXPECT_EQ(lit.F, her.F);
}

TEST(Otoc, CanonicalCommutatorAtLowTemperature) {
    const auto& a = testsupport::decomposition(strong_field(), 48);
    const auto& b = testsupport::decomposition(strong_field(), 64);
    const std::size_t reliable = estimate_errors(a, b).reliable_count;
    const std::size_t M = std::min<std::size_t>(500, reliable);
    ASSERT_GE(M, 200u);
    const auto w = operator_matrix(b, OperatorKind::theta1, M, reliable);
    const auto v = operator_matrix(b, OperatorKind::p1, M, reliable);
    const auto v2 = operator_matrix(b, OperatorKind::p1sq, M, reliable);
    const std::vector<double> t0{0.0};
    const auto s = otoc_series(w, v, v2, std::span(b.eigenvalues.data(), M), 10.0, t0);
    EXPECT_NEAR(s.C[0], 1.0, 0.1);
}

TEST(Otoc, TruncationStabilityAtLowTemperature) {
    const auto& eig = small();
    std::vector<double> times;
    for (int i = 0; i <= 20; ++i) times.push_back(0.25 * i);
    auto run = [&](std::size_t M) {
        const auto w = operator_matrix(eig, OperatorKind::theta1, M, M);
        const auto v = operator_matrix(eig, OperatorKind::p1, M, M);
        const auto v2 = operator_matrix(eig, OperatorKind::p1sq, M, M);
        return otoc_series(w, v, v2, std::span(eig.eigenvalues.data(), M), 2.0, times);
    };
    EXPECT_LT(truncation_change(run(60), run(120)), 0.05);
}

TEST(Otoc, BoltzmannWeights) {
    const std::vector<double> e{1.0, 2.0, 3.0};
    double lz = 0.0;
    const auto rho = boltzmann_weights(e, 1.0, &lz);
    EXPECT_NEAR(rho[0] + rho[1] + rho[2], 1.0, 1e-15);
    EXPECT_NEAR(rho[1] / rho[0], std::exp(-1.0), 1e-15);
    EXPECT_NEAR(lz, std::log(std::exp(-1.0) + std::exp(-2.0) + std::exp(-3.0)), 1e-14);
    const std::vector<double> far{1000.0, 1001.0};
    EXPECT_NO_THROW(boltzmann_weights(far, 50.0));
    EXPECT_THROW(boltzmann_weights(e, 0.0), InvalidArgument);
    EXPECT_THROW(boltzmann_weights(e, -1.0), InvalidArgument);
}

TEST(Otoc, ShortTimeFitRecoversTemplate) {
    OtocSeries s;
    s.beta = 0.5;
    for (int i = 0; i < 12; ++i) {
        s.times.push_back(0.05 * i);
        s.F.emplace_back(2.0 + 3.0 * std::exp(1.5 * s.times.back()), 0.0);
        s.C.push_back(0.0);
    }
    const auto f = fit_otoc_short_time(s);
    EXPECT_NEAR(f.a, 2.0, 1e-6);
    EXPECT_NEAR(f.b, 3.0, 1e-6);
    EXPECT_NEAR(f.lambda_q, 1.5, 1e-6);
    EXPECT_EQ(f.window, 10u);
    EXPECT_NEAR(f.mss_bound, 4 * std::numbers::pi, 1e-12);
    EXPECT_NEAR(f.saturation_ratio, 1.5 / (4 * std::numbers::pi), 1e-9);
    EXPECT_THROW(fit_otoc_short_time(s, 3), InsufficientData);
    EXPECT_THROW(fit_otoc_short_time(s, 13), InsufficientData);
    EXPECT_THROW(fit_otoc_short_time(s, 5, FitTarget::C), NoConvergence);
}

TEST(Otoc, MssReport) {
    const double beta = 2 * std::numbers::pi / (256 * std::numbers::pi);
    const auto r = mss_report(2.5, beta);
    EXPECT_NEAR(r.ratio, 2.5 / (256 * std::numbers::pi), 1e-12);
    EXPECT_NEAR(r.ratio, 0.0031, 1e-4);
    EXPECT_FALSE(r.saturated);
    EXPECT_FALSE(r.violated);
    EXPECT_NE(r.summary.find("far below saturation"), std::string::npos);
    EXPECT_EQ(mss_report(0.0, 1.0).ratio, 0.0);
    const auto sat = mss_report(2 * std::numbers::pi / 0.7, 0.7);
    EXPECT_NEAR(sat.ratio, 1.0, 1e-12);
    EXPECT_TRUE(sat.saturated);
    const auto bad = mss_report(10.0, 1.0);
    EXPECT_TRUE(bad.violated);
}

TEST(Otoc, ShortTimeGridScalesWithQuasiPeriod) {
    const auto t = short_time_grid(strong_field());
    ASSERT_EQ(t.size(), 10u);
    const double tau = 2 * std::numbers::pi * std::sqrt(2.0 / 10.0);
    EXPECT_EQ(t[0], 0.0);
    EXPECT_NEAR(t[9], 9 * 0.005 * tau, 1e-14);
}
