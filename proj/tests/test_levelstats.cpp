#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "chaology/error.hpp"
#include "chaology/levelstats.hpp"
#include "support.hpp"

using namespace chaology;
using std::numbers::pi;

namespace {

std::vector<double> poisson_levels(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> ex(1.0);
    std::vector<double> e{0.0};
    while (e.size() < n) e.push_back(e.back() + ex(rng));
    return e;
}

std::vector<double> goe_levels(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd a(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) a(i, j) = nd(rng);
    const Eigen::MatrixXd h = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().data(), es.eigenvalues().data() + n};
}

double integrate(const std::function<double(double)>& f, double lo, double hi, int steps = 200000) {
    const double h = (hi - lo) / steps;
    double s = 0.5 * (f(lo) + f(hi));
    for (int i = 1; i < steps; ++i) s += f(lo + i * h);
    return s * h;
}

std::vector<double> nn_spacings(const std::vector<double>& u) {
    std::vector<double> s;
    for (std::size_t i = 1; i < u.size(); ++i) s.push_back(u[i] - u[i - 1]);
    return s;
}

}  // namespace

TEST(LevelStats, SpacingExamples) {
    const std::vector<double> a{0, 1, 2, 3};
    EXPECT_EQ(spacings(a, 1, 4), (std::vector<double>{1, 1, 1}));
    const std::vector<double> b{0, 1, 3, 6};
    EXPECT_EQ(spacings(b, 2, 4), (std::vector<double>{3, 5}));
    EXPECT_EQ(spacings(b, 1, 3).size(), 2u);
}

TEST(LevelStats, SpacingErrors) {
    const std::vector<double> a{0, 1, 2, 3};
    EXPECT_THROW(spacings(a, 0, 4), InvalidArgument);
    EXPECT_THROW(spacings(a, 2, 3), InvalidArgument);
    EXPECT_THROW(spacings(a, 1, 5), RangeError);
}

TEST(LevelStats, SpacingCountAndSign) {
    const auto e = poisson_levels(500, 3);
    const auto s = spacings(e, 1, e.size());
    EXPECT_EQ(s.size(), e.size() - 1);
    for (double v : s) EXPECT_GE(v, 0.0);
}

TEST(LevelStats, Templates) {
    EXPECT_EQ(goe_template(0.0), 0.0);
    const double peak = std::sqrt(2.0 / pi);
    EXPECT_NEAR(peak, 0.79788, 1e-5);
    EXPECT_GT(goe_template(peak), goe_template(peak - 1e-3));
    EXPECT_GT(goe_template(peak), goe_template(peak + 1e-3));
    EXPECT_NEAR(integrate(goe_template, 0, 12), 1.0, 1e-8);
    EXPECT_NEAR(integrate(poisson_template_unit, 0, 60), 1.0, 1e-8);
    EXPECT_NEAR(integrate(poisson_template_paper, 0, 12), 5.0 / (2 * pi), 1e-8);
    EXPECT_NEAR(5.0 / (2 * pi), 0.7958, 1e-4);
    for (double x : {0.1, 0.7, 1.9}) {
        EXPECT_NEAR(goe_cdf(x), integrate(goe_template, 0, x), 1e-9);
        EXPECT_NEAR(poisson_unit_cdf(x), integrate(poisson_template_unit, 0, x), 1e-9);
        EXPECT_NEAR(poisson_paper_cdf(x), integrate(poisson_template_paper, 0, x) * 2 * pi / 5, 1e-8);
    }
}

TEST(LevelStats, HistogramMass) {
    for (unsigned seed : {1u, 2u, 3u}) {
        const auto s = nn_spacings(poisson_levels(1000, seed));
        const auto h = density_histogram(s);
        EXPECT_EQ(h.edges.size(), 51u);
        EXPECT_NEAR(h.mass(), 1.0, 1e-9);
        EXPECT_EQ(h.edges.front(), 0.0);
        EXPECT_EQ(h.edges.back(), *std::max_element(s.begin(), s.end()));
    }
    const std::vector<double> v{0.5, 1.5, 2.5};
    EXPECT_NEAR(density_histogram(v, 7, 10.0).mass(), 1.0, 1e-12);
    EXPECT_THROW(density_histogram(v, 0), InvalidArgument);
    EXPECT_THROW(density_histogram(std::vector<double>{}), InsufficientData);
}

TEST(LevelStats, SpacingDistributionUnitMean) {
    const auto e = poisson_levels(400, 9);
    const auto d = spacing_distribution(e, 2, e.size(), Normalization::unit_mean);
    EXPECT_EQ(d.r, 2);
    EXPECT_NEAR(std::accumulate(d.spacings.begin(), d.spacings.end(), 0.0) / double(d.spacings.size()), 1.0, 1e-12);
    EXPECT_NEAR(d.histogram.mass(), 1.0, 1e-9);
}

TEST(LevelStats, KolmogorovSmirnov) {
    const auto s = nn_spacings(poisson_levels(800, 4));
    EXPECT_EQ(ks_two_sample(s, s), 0.0);
    for (auto* cdf : {&goe_cdf, &poisson_unit_cdf, &poisson_paper_cdf}) {
        const double d = ks_distance(s, *cdf);
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 1.0);
    }
    // a single point at the median of e^{−x}: sup distance is exactly ½
    const std::vector<double> one{std::log(2.0)};
    EXPECT_NEAR(ks_distance(one, poisson_unit_cdf), 0.5, 1e-15);
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    EXPECT_EQ(ks_two_sample(a, b), 1.0);
}

TEST(LevelStats, UnfoldLinearSpectrum) {
    std::vector<double> e;
    for (int n = 0; n < 300; ++n) e.push_back(0.37 * n + 2.0);
    const auto u = unfold_polynomial(e, 1);
    for (double s : nn_spacings(u)) EXPECT_NEAR(s, 1.0, 1e-9);
}

TEST(LevelStats, UnfoldErrors) {
    const auto e = poisson_levels(100, 5);
    EXPECT_THROW(unfold(e, 2), InvalidArgument);
    EXPECT_THROW(unfold(e, 13), InvalidArgument);
    EXPECT_THROW(unfold_polynomial(e, 0), InvalidArgument);
    EXPECT_THROW(unfold(std::vector<double>(50, 1.0), 5), FitDegenerate);
    EXPECT_THROW(unfold(std::vector<double>{0, 1, 2, 3, 4}, 5), FitDegenerate);
}

TEST(LevelStats, UnfoldedSpacingsHaveUnitMean) {
    std::vector<std::vector<double>> inputs{poisson_levels(1500, 6), goe_levels(1000, 7)};
    std::vector<double> power;
    for (int n = 0; n < 1200; ++n) power.push_back(std::pow(n, 1.5));
    inputs.push_back(power);
    for (const auto& e : inputs) {
        const auto s = nn_spacings(unfold(e, 5));
        const double mean = std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
        EXPECT_NEAR(mean, 1.0, 0.02);
    }
}

TEST(LevelStats, SyntheticPoissonIsPoisson) {
    const auto e = poisson_levels(1000, 8);
    const auto raw = compare_templates(nn_spacings(e), Scaling::unit_mean);
    EXPECT_EQ(raw.verdict, Verdict::poisson);
    EXPECT_EQ(raw.n_spacings, 999u);
    const auto unf = compare_templates(nn_spacings(unfold(e, 5)), Scaling::unit_mean);
    EXPECT_EQ(unf.verdict, Verdict::poisson);
    EXPECT_LT(unf.ks_poisson, unf.ks_goe);
}

TEST(LevelStats, SyntheticGoeIsGoe) {
    const auto e = goe_levels(500, 10);
    // the bulk of the semicircle, unfolded
    std::vector<double> bulk(e.begin() + 50, e.end() - 50);
    const auto fit = compare_templates(nn_spacings(unfold(bulk, 7)), Scaling::unit_mean);
    EXPECT_EQ(fit.verdict, Verdict::goe);
    EXPECT_LT(fit.ks_goe, 0.08);
}

TEST(LevelStats, CompareTemplatesNeedsData) {
    EXPECT_THROW(compare_templates(std::vector<double>(199, 1.0), Scaling::unit_mean), InsufficientData);
    EXPECT_NO_THROW(compare_templates(std::vector<double>(200, 1.0), Scaling::paper_hand_fit));
    EXPECT_STREQ(to_string(Verdict::goe), "GOE");
    EXPECT_STREQ(to_string(Scaling::unit_mean), "unit-mean");
}

TEST(LevelStats, ParitySplit) {
    PendulumParams p;
    p.g = 10.0;
    const auto eig = solve(assemble_hamiltonian(p, Grid2D::uniform(20, 20)));
    const auto split = split_parity(eig, 150);
    EXPECT_GT(split.parity[0], 0.9);
    EXPECT_EQ(split.even.size() + split.odd.size() + split.unclassified.size(), 150u);
    EXPECT_EQ(split.parity.size(), 150u);
    EXPECT_FALSE(split.even.empty());
    EXPECT_FALSE(split.odd.empty());
    const auto again = split_parity(eig, 150);
    EXPECT_EQ(again.even, split.even);
    EXPECT_EQ(again.odd, split.odd);
    EXPECT_EQ(split_parity(eig).parity.size(), eig.count());
}
