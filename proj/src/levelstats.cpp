#include "chaology/levelstats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "chaology/error.hpp"

namespace chaology {

namespace {
constexpr double pi = std::numbers::pi;
}

double Histogram::mass() const {
    double m = 0.0;
    for (std::size_t b = 0; b < density.size(); ++b) m += density[b] * (edges[b + 1] - edges[b]);
    return m;
}

Histogram density_histogram(std::span<const double> values, int bins, std::optional<double> upper) {
    if (bins < 1) throw InvalidArgument("density_histogram: bins must be positive");
    if (values.empty()) throw InsufficientData("density_histogram: no values");
    const double hi = upper ? *upper : *std::max_element(values.begin(), values.end());
    if (!(hi > 0.0)) throw InvalidArgument("density_histogram: upper edge must be positive");

    Histogram h;
    h.edges.resize(std::size_t(bins) + 1);
    for (int b = 0; b <= bins; ++b) h.edges[std::size_t(b)] = hi * b / bins;
    std::vector<double> counts(std::size_t(bins), 0.0);
    std::size_t inside = 0;
    for (double v : values) {
        if (v < 0.0 || v > hi) continue;
        const int b = std::min(bins - 1, int(v / hi * bins));
        counts[std::size_t(b)] += 1.0;
        ++inside;
    }
    const double width = hi / bins;
    h.density.resize(std::size_t(bins));
    for (int b = 0; b < bins; ++b)
        h.density[std::size_t(b)] = inside ? counts[std::size_t(b)] / (double(values.size()) * width) : 0.0;
    return h;
}

std::vector<double> spacings(std::span<const double> e, int r, std::size_t reliable_count) {
    if (r < 1) throw InvalidArgument("spacings: r must be at least 1");
    if (reliable_count < std::size_t(r) + 2)
        throw InvalidArgument("spacings: reliable_count must be at least r + 2");
    if (reliable_count > e.size())
        throw RangeError("spacings: reliable_count exceeds the number of levels");
    std::vector<double> s;
    s.reserve(reliable_count - std::size_t(r));
    for (std::size_t i = std::size_t(r); i < reliable_count; ++i) s.push_back(std::max(0.0, e[i] - e[i - std::size_t(r)]));
    return s;
}

SpacingDistribution spacing_distribution(std::span<const double> e, int r, std::size_t reliable_count,
                                         Normalization normalization, int bins) {
    SpacingDistribution d;
    d.r = r;
    d.normalization = normalization;
    d.spacings = spacings(e, r, reliable_count);
    if (normalization == Normalization::unit_mean) {
        const double mean = std::accumulate(d.spacings.begin(), d.spacings.end(), 0.0) / double(d.spacings.size());
        if (!(mean > 0.0)) throw InsufficientData("spacing_distribution: all spacings are zero");
        for (double& s : d.spacings) s /= mean;
    }
    d.histogram = density_histogram(d.spacings, bins);
    return d;
}

double goe_template(double x) { return 0.5 * pi * x * std::exp(-0.25 * pi * x * x); }
double poisson_template_paper(double x) { return 5.0 * std::exp(-2.0 * pi * x); }
double poisson_template_unit(double x) { return std::exp(-x); }

double goe_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-0.25 * pi * x * x); }
double poisson_unit_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); }
double poisson_paper_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-2.0 * pi * x); }

double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw InsufficientData("ks_distance: empty sample");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double n = double(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max({d, double(i + 1) / n - f, f - double(i) / n});
    }
    return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InsufficientData("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(double(i) / double(x.size()) - double(j) / double(y.size())));
    }
    return d;
}

std::vector<double> unfold_polynomial(std::span<const double> e, int degree) {
    if (degree < 1 || degree > 12) throw InvalidArgument("unfold: degree must be in [1, 12]");
    const std::size_t n = e.size();
    if (n < std::size_t(degree) + 2) throw FitDegenerate("unfold: too few levels for the degree");
    const double lo = e.front(), hi = e.back();
    if (!(hi > lo)) throw FitDegenerate("unfold: spectrum has zero width");

    // Chebyshev basis on the mapped energy keeps the normal matrix well conditioned
    auto basis = [&](double energy, Eigen::MatrixXd& a, Eigen::Index r) {
        const double x = 2.0 * (energy - lo) / (hi - lo) - 1.0;
        a(r, 0) = 1.0;
        a(r, 1) = x;
        for (int d = 2; d <= degree; ++d) a(r, d) = 2.0 * x * a(r, d - 1) - a(r, d - 2);
    };
    Eigen::MatrixXd a(Eigen::Index(n), degree + 1);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        basis(e[i], a, Eigen::Index(i));
        y[Eigen::Index(i)] = double(i) + 0.5;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-12);
    if (qr.rank() < degree + 1)
        throw FitDegenerate("unfold: staircase fit is rank-deficient (rank " + std::to_string(qr.rank()) +
                            " < " + std::to_string(degree + 1) + ")");
    const Eigen::VectorXd coef = qr.solve(y);
    const Eigen::VectorXd fitted = a * coef;
    return {fitted.data(), fitted.data() + fitted.size()};
}

std::vector<double> unfold(std::span<const double> e, int degree) {
    if (degree < 3 || degree > 12) throw InvalidArgument("unfold: degree must be in [3, 12]");
    return unfold_polynomial(e, degree);
}

const char* to_string(Verdict v) { return v == Verdict::goe ? "GOE" : "Poisson"; }
const char* to_string(Scaling s) { return s == Scaling::unit_mean ? "unit-mean" : "paper-hand-fit"; }

TemplateFit compare_templates(std::span<const double> s, Scaling scaling) {
    if (s.size() < 200)
        throw InsufficientData("compare_templates: " + std::to_string(s.size()) + " spacings, need 200");
    TemplateFit fit;
    fit.scaling = scaling;
    fit.n_spacings = s.size();
    if (scaling == Scaling::unit_mean) {
        const double mean = std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
        if (!(mean > 0.0)) throw InsufficientData("compare_templates: all spacings are zero");
        std::vector<double> u(s.begin(), s.end());
        for (double& v : u) v /= mean;
        fit.ks_goe = ks_distance(u, goe_cdf);
        fit.ks_poisson = ks_distance(u, poisson_unit_cdf);
    } else {
        fit.ks_goe = ks_distance(s, goe_cdf);
        fit.ks_poisson = ks_distance(s, poisson_paper_cdf);
    }
    fit.verdict = fit.ks_goe < fit.ks_poisson ? Verdict::goe : Verdict::poisson;
    return fit;
}

ParitySplit split_parity(const EigenDecomposition& eig, std::optional<std::size_t> limit, double threshold) {
    const std::size_t n = limit ? std::min(*limit, eig.count()) : eig.count();
    const auto perm = eig.grid.parity_permutation();
    if (perm.size() != eig.dim()) throw GridMismatch("split_parity: eigenvectors do not match the grid");
    ParitySplit out;
    out.parity.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        const auto col = eig.eigenvectors.col(Eigen::Index(c));
        double acc = 0.0;
        for (std::size_t k = 0; k < perm.size(); ++k) acc += col[Eigen::Index(k)] * col[Eigen::Index(perm[k])];
        const double p = acc * eig.grid.weight;
        out.parity[c] = p;
        const double e = eig.eigenvalues[Eigen::Index(c)];
        if (p >= threshold)
            out.even.push_back(e);
        else if (p <= -threshold)
            out.odd.push_back(e);
        else
            out.unclassified.push_back(c);
    }
    return out;
}

}  // namespace chaology
