#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chaology/eigensolve.hpp"

namespace chaology {

struct Histogram {
    std::vector<double> edges;    ///< bins + 1 edges
    std::vector<double> density;  ///< count / (n · width)

    /// Σ density·width; 1 for a non-empty density histogram.
    double mass() const;
};

/// Uniform bins over [0, upper]; `upper` defaults to the sample maximum.
Histogram density_histogram(std::span<const double> values, int bins = 50,
                            std::optional<double> upper = std::nullopt);

enum class Normalization { raw, unit_mean };

/// Order-r spacings s_i = E_i − E_{i−r} over the first `reliable_count` levels.
/// Throws InvalidArgument unless r ≥ 1 and reliable_count ≥ r + 2.
std::vector<double> spacings(std::span<const double> eigenvalues, int r,
                             std::size_t reliable_count);

struct SpacingDistribution {
    std::vector<double> spacings;
    int r = 1;
    Histogram histogram;
    Normalization normalization = Normalization::raw;
};

SpacingDistribution spacing_distribution(std::span<const double> eigenvalues, int r,
                                         std::size_t reliable_count,
                                         Normalization normalization = Normalization::raw,
                                         int bins = 50);

/// Wigner surmise (πx/2)·exp(−πx²/4).
double goe_template(double x);
/// 5·exp(−2πx), the hand-scaled curve drawn over raw spacings; not a density.
double poisson_template_paper(double x);
/// exp(−x), the unit-mean Poisson density.
double poisson_template_unit(double x);

double goe_cdf(double x);
double poisson_unit_cdf(double x);
/// CDF of the density proportional to poisson_template_paper: 1 − exp(−2πx).
double poisson_paper_cdf(double x);

/// sup_x |F_n(x) − cdf(x)| for the empirical CDF of `sample`.
double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Two-sample sup distance between empirical CDFs.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Fits the staircase N(E) with a degree-d polynomial and returns N̄(E_n).
/// Accepts 1 ≤ d ≤ 12. Throws FitDegenerate when the fit is rank-deficient.
std::vector<double> unfold_polynomial(std::span<const double> eigenvalues, int degree);

/// unfold_polynomial restricted to the supported range 3 ≤ d ≤ 12.
std::vector<double> unfold(std::span<const double> eigenvalues, int degree);

enum class Scaling {
    paper_hand_fit,  ///< raw spacings against the hand-scaled templates, each normalized to a density
    unit_mean,       ///< spacings divided by their mean against e^{−s} and the Wigner surmise
};

enum class Verdict { goe, poisson };

const char* to_string(Verdict v);
const char* to_string(Scaling s);

struct TemplateFit {
    double ks_goe = 0.0;
    double ks_poisson = 0.0;
    Verdict verdict = Verdict::poisson;
    Scaling scaling = Scaling::unit_mean;
    std::size_t n_spacings = 0;
};

/// KS distances to both templates; ties go to Poisson.
/// Throws InsufficientData for fewer than 200 spacings.
TemplateFit compare_templates(std::span<const double> spacings, Scaling scaling);

struct ParitySplit {
    std::vector<double> even;
    std::vector<double> odd;
    std::vector<std::size_t> unclassified;  ///< level indices with |⟨P⟩| < threshold
    std::vector<double> parity;             ///< ⟨Ψn|P|Ψn⟩ per inspected level
};

/// Sorts the first `limit` levels (all by default) into parity sectors.
ParitySplit split_parity(const EigenDecomposition& eig, std::optional<std::size_t> limit = std::nullopt,
                         double threshold = 0.9);

}  // namespace chaology
