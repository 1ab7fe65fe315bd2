#pragma once

#include <span>

namespace chaology {

/// Ordinary least-squares line y ≈ intercept + slope·x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;           ///< root-mean-square residual
    double r2 = 0.0;            ///< coefficient of determination; 1 for a constant exact fit
    double slope_stderr = 0.0;  ///< standard error of the slope (0 when n ≤ 2)
};

/// Throws InsufficientData for fewer than two points or a degenerate x range.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Template y ≈ a + b·exp(λ t).
struct ExpFit {
    double a = 0.0;
    double b = 0.0;
    double lambda = 0.0;
    double rms = 0.0;
};

/// Nonlinear least squares for a + b·e^{λt}. For fixed λ the model is linear in
/// (a, b), so the residual is profiled over λ alone: coarse scan over
/// [lambda_lo, lambda_hi] followed by Brent refinement. Throws NoConvergence when
/// the data are flat or the optimum sits on the scan boundary.
ExpFit fit_exponential(std::span<const double> t, std::span<const double> y,
                       double lambda_lo = -50.0, double lambda_hi = 200.0);

}  // namespace chaology
