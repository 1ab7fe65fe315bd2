#include "chaology/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "chaology/error.hpp"

namespace chaology {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size()) throw InvalidArgument("fit_line: x and y differ in length");
    if (n < 2) throw InsufficientData("fit_line needs at least two points");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw InsufficientData("fit_line: all x values coincide");

    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        sse += r * r;
    }
    f.rms = std::sqrt(sse / double(n));
    f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    f.slope_stderr = n > 2 ? std::sqrt(sse / double(n - 2) / sxx) : 0.0;
    return f;
}

namespace {

struct Profiled {
    double sse;
    double a;
    double b;
};

// Linear least squares for (a, b) at fixed λ, on centred normal equations.
Profiled profile(std::span<const double> t, std::span<const double> y, double lambda) {
    const std::size_t n = t.size();
    std::vector<double> e(n);
    double me = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = std::exp(lambda * t[i]);
        me += e[i];
        my += y[i];
    }
    me /= double(n);
    my /= double(n);
    double see = 0.0, sey = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double de = e[i] - me, dy = y[i] - my;
        see += de * de;
        sey += de * dy;
        syy += dy * dy;
    }
    if (!(see > 1e-300) || !std::isfinite(see)) return {syy, my, 0.0};
    const double b = sey / see;
    const double a = my - b * me;
    // explicit residuals; syy − sey²/see cancels badly near an exact fit
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - a - b * e[i];
        sse += r * r;
    }
    return {sse, a, b};
}

}  // namespace

ExpFit fit_exponential(std::span<const double> t, std::span<const double> y,
                       double lambda_lo, double lambda_hi) {
    const std::size_t n = t.size();
    if (n != y.size()) throw InvalidArgument("fit_exponential: t and y differ in length");
    if (n < 4) throw InsufficientData("fit_exponential needs at least four samples");
    if (!(lambda_hi > lambda_lo)) throw InvalidArgument("fit_exponential: empty λ range");

    double ymin = y[0], ymax = y[0];
    for (double v : y) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    const double scale = std::max(std::abs(ymin), std::abs(ymax));
    if (!(ymax - ymin > 1e-12 * std::max(scale, 1e-300)))
        throw NoConvergence("fit_exponential: series is flat, λ is unidentifiable");

    constexpr int scan = 4000;
    const double step = (lambda_hi - lambda_lo) / scan;
    int best = 0;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= scan; ++i) {
        const double lam = lambda_lo + step * i;
        const double sse = profile(t, y, lam).sse;
        if (sse < best_sse) {
            best_sse = sse;
            best = i;
        }
    }
    if (best == 0 || best == scan)
        throw NoConvergence("fit_exponential: optimum on the λ scan boundary (" +
                            std::to_string(lambda_lo + step * best) + ")");

    auto objective = [&](double lam) { return profile(t, y, lam).sse; };
    const auto [lam, sse] = boost::math::tools::brent_find_minima(
        objective, lambda_lo + step * (best - 1), lambda_lo + step * (best + 1),
        std::numeric_limits<double>::digits / 2 + 4);

    const auto p = profile(t, y, lam);
    ExpFit f;
    f.lambda = lam;
    f.a = p.a;
    f.b = p.b;
    f.rms = std::sqrt(sse / double(n));
    return f;
}

}  // namespace chaology
