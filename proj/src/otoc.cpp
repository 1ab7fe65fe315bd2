#include "chaology/otoc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "chaology/classical.hpp"
#include "chaology/error.hpp"
#include "chaology/parallel.hpp"

namespace chaology {

const char* to_string(OperatorKind k) {
    switch (k) {
        case OperatorKind::theta1: return "theta1";
        case OperatorKind::theta2: return "theta2";
        case OperatorKind::p1: return "p1";
        case OperatorKind::p2: return "p2";
        case OperatorKind::p1sq: return "p1sq";
        case OperatorKind::p2sq: return "p2sq";
    }
    return "?";
}

Eigen::MatrixXcd OperatorMatrix::complex_entries() const {
    Eigen::MatrixXcd out = entries.cast<std::complex<double>>();
    if (imaginary) out *= std::complex<double>(0.0, 1.0);
    return out;
}

OperatorMatrix operator_matrix(const EigenDecomposition& eig, OperatorKind kind, std::size_t M,
                               std::size_t reliable_count) {
    if (M == 0) throw InvalidArgument("operator_matrix: M must be positive");
    if (M > reliable_count)
        throw TruncationError("operator_matrix: M=" + std::to_string(M) + " exceeds the reliable count " +
                              std::to_string(reliable_count));
    if (M > eig.count())
        throw TruncationError("operator_matrix: M=" + std::to_string(M) + " exceeds the " +
                              std::to_string(eig.count()) + " stored levels");

    const auto psi = eig.eigenvectors.leftCols(Eigen::Index(M));
    const Grid2D& grid = eig.grid;
    const double hbar = eig.params.hbar;
    OperatorMatrix op;
    op.kind = kind;
    op.M = M;

    Eigen::MatrixXd applied;
    double scale = grid.weight;
    switch (kind) {
        case OperatorKind::theta1:
        case OperatorKind::theta2: {
            applied.resize(psi.rows(), psi.cols());
            for (Eigen::Index k = 0; k < psi.rows(); ++k) {
                const double th = kind == OperatorKind::theta1 ? grid.angle1_at(std::size_t(k))
                                                               : grid.angle2_at(std::size_t(k));
                applied.row(k) = th * psi.row(k);
            }
            break;
        }
        case OperatorKind::p1:
            applied = apply_axis1(build_diff_ops(grid.n1, eig.stencil).d1, psi, grid);
            scale *= -hbar;
            op.imaginary = true;
            break;
        case OperatorKind::p2:
            applied = apply_axis2(build_diff_ops(grid.n2, eig.stencil).d1, psi, grid);
            scale *= -hbar;
            op.imaginary = true;
            break;
        case OperatorKind::p1sq:
            applied = apply_axis1(build_diff_ops(grid.n1, eig.stencil).dd1, psi, grid);
            scale *= -hbar * hbar;
            break;
        case OperatorKind::p2sq:
            applied = apply_axis2(build_diff_ops(grid.n2, eig.stencil).dd1, psi, grid);
            scale *= -hbar * hbar;
            break;
    }
    op.entries.noalias() = scale * (psi.transpose() * applied);
    return op;
}

std::vector<double> boltzmann_weights(std::span<const double> e, double beta, double* log_z) {
    if (e.empty()) throw InvalidArgument("boltzmann_weights: no levels");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("boltzmann_weights: beta must be positive and finite");
    const double e0 = *std::min_element(e.begin(), e.end());
    std::vector<double> rho(e.size());
    double sum = 0.0;
    for (std::size_t n = 0; n < e.size(); ++n) {
        rho[n] = std::exp(-beta * (e[n] - e0));
        sum += rho[n];
    }
    if (!std::isfinite(sum) || !(sum > 0.0))
        throw OverflowGuard("boltzmann_weights: partition sum is not finite after the ground-state shift");
    for (double& r : rho) r /= sum;
    if (log_z) *log_z = -beta * e0 + std::log(sum);
    return rho;
}

namespace {

using cd = std::complex<double>;

// (Xr + iXi)·R for real R, as two real products.
Eigen::MatrixXcd times_real(const Eigen::MatrixXd& xr, const Eigen::MatrixXd& xi, const Eigen::MatrixXd& r) {
    Eigen::MatrixXcd out(xr.rows(), r.cols());
    out.real().noalias() = xr * r;
    out.imag().noalias() = xi * r;
    return out;
}

}  // namespace

OtocSeries otoc_series(const OperatorMatrix& w, const OperatorMatrix& v, const OperatorMatrix& v_squared,
                       std::span<const double> energies, double beta, std::span<const double> times,
                       const OtocOptions& opts) {
    const Eigen::Index M = w.entries.rows();
    if (v.entries.rows() != M || v_squared.entries.rows() != M || Eigen::Index(energies.size()) < M)
        throw InvalidArgument("otoc_series: operator sizes and energy count disagree");
    if (v_squared.imaginary) throw InvalidArgument("otoc_series: V² must be a real matrix");
    if (!std::is_sorted(energies.begin(), energies.begin() + M))
        throw InvalidArgument("otoc_series: energies must be ascending");

    OtocSeries out;
    out.times.assign(times.begin(), times.end());
    out.beta = beta;
    out.hbar = opts.hbar;
    out.M = std::size_t(M);
    out.form = opts.form;
    const auto rho = boltzmann_weights(energies.first(std::size_t(M)), beta, &out.log_Z);

    // weights are non-increasing, so the occupied levels form a prefix
    Eigen::Index s = 0;
    while (s < M && rho[std::size_t(s)] > 0.0) ++s;

    const cd fw = w.imaginary ? cd(0, 1) : cd(1, 0);
    const cd fv = v.imaginary ? cd(0, 1) : cd(1, 0);
    const cd f_factor = (fw * fv) * (fw * fv);
    const cd wv2w_factor = fw * fw;

    out.F.resize(times.size());
    out.C.resize(times.size());
    out.C_imag.resize(times.size());

    parallel_for(times.size(), opts.threads, [&](std::size_t ti) {
        const double t = times[ti];
        Eigen::VectorXd c(M), sn(M);
        for (Eigen::Index n = 0; n < M; ++n) {
            c[n] = std::cos(energies[std::size_t(n)] * t);
            sn[n] = std::sin(energies[std::size_t(n)] * t);
        }
        // Xe_nk = W_nk·exp(i(E_n − E_k)t)
        Eigen::MatrixXd xr(M, M), xi(M, M);
        for (Eigen::Index k = 0; k < M; ++k)
            for (Eigen::Index n = 0; n < M; ++n) {
                const double cr = c[n] * c[k] + sn[n] * sn[k];
                const double ci = sn[n] * c[k] - c[n] * sn[k];
                xr(n, k) = w.entries(n, k) * cr;
                xi(n, k) = w.entries(n, k) * ci;
            }

        // Y = Xe·Ve: rows [0,s) and columns [0,s)
        const Eigen::MatrixXcd y_rows = times_real(xr.topRows(s), xi.topRows(s), v.entries);
        const Eigen::MatrixXcd y_cols =
            s == M ? y_rows : times_real(xr, xi, v.entries.leftCols(s));
        const Eigen::MatrixXcd xv2 = times_real(xr.topRows(s), xi.topRows(s), v_squared.entries);

        cd f = 0.0, wv2w = 0.0;
        double vw2v = 0.0;
        for (Eigen::Index n = 0; n < s; ++n) {
            cd fn = 0.0, an = 0.0;
            double bn = 0.0;
            for (Eigen::Index k = 0; k < M; ++k) {
                fn += y_rows(n, k) * y_cols(k, n);
                an += xv2(n, k) * cd(xr(k, n), xi(k, n));
                bn += std::norm(y_cols(k, n));
            }
            const double r = rho[std::size_t(n)];
            f += r * fn;
            wv2w += r * an;
            vw2v += r * bn;
        }
        f *= f_factor;
        wv2w *= wv2w_factor;

        out.F[ti] = f;
        if (opts.form == CommutatorForm::hermitian) {
            out.C[ti] = wv2w.real() + vw2v - 2.0 * f.real();
            out.C_imag[ti] = wv2w.imag();
        } else {
            const cd cc = 2.0 * wv2w - 2.0 * f;
            out.C[ti] = cc.real();
            out.C_imag[ti] = cc.imag();
        }
    });
    return out;
}

OtocFit fit_otoc_short_time(const OtocSeries& series, std::size_t window, FitTarget target) {
    if (window < 4) throw InsufficientData("fit_otoc_short_time: window must hold at least 4 samples");
    if (series.times.size() < window)
        throw InsufficientData("fit_otoc_short_time: series has " + std::to_string(series.times.size()) +
                               " samples, window needs " + std::to_string(window));
    std::vector<double> t(series.times.begin(), series.times.begin() + std::ptrdiff_t(window));
    std::vector<double> y(window);
    for (std::size_t i = 0; i < window; ++i)
        y[i] = target == FitTarget::re_F ? series.F[i].real() : series.C[i];

    const auto ef = fit_exponential(t, y);
    OtocFit fit;
    fit.a = ef.a;
    fit.b = ef.b;
    fit.lambda_q = ef.lambda;
    fit.rms = ef.rms;
    fit.t_lo = t.front();
    fit.t_hi = t.back();
    fit.window = window;
    fit.beta = series.beta;
    fit.target = target;
    fit.mss_bound = 2.0 * std::numbers::pi / (series.beta * series.hbar);
    fit.saturation_ratio = fit.lambda_q / fit.mss_bound;
    return fit;
}

MssReport mss_report(double lambda_q, double beta, double hbar) {
    if (!(beta > 0.0) || !(hbar > 0.0)) throw InvalidArgument("mss_report: beta and hbar must be positive");
    MssReport r;
    r.lambda_q = lambda_q;
    r.bound = 2.0 * std::numbers::pi / (beta * hbar);
    r.ratio = lambda_q / r.bound;
    r.saturated = std::abs(r.ratio - 1.0) <= 1e-9;
    r.violated = r.ratio > 1.0 + 1e-9;
    std::ostringstream s;
    s << "lambda_q=" << lambda_q << " bound=" << r.bound << " ratio=" << r.ratio << ": ";
    if (r.violated)
        s << "VIOLATES the bound";
    else if (r.saturated)
        s << "saturated";
    else if (r.ratio < 0.1)
        s << "far below saturation";
    else
        s << "below saturation";
    r.summary = s.str();
    return r;
}

MssReport mss_report(const OtocFit& fit, double hbar) { return mss_report(fit.lambda_q, fit.beta, hbar); }

std::vector<double> short_time_grid(const PendulumParams& params, std::size_t samples, double fraction) {
    if (samples < 2) throw InvalidArgument("short_time_grid: need at least 2 samples");
    if (!(fraction > 0.0)) throw InvalidArgument("short_time_grid: fraction must be positive");
    const double dt = fraction * default_balancing_constant(params);
    std::vector<double> t(samples);
    for (std::size_t i = 0; i < samples; ++i) t[i] = double(i) * dt;
    return t;
}

double truncation_change(const OtocSeries& coarse, const OtocSeries& fine) {
    if (coarse.times != fine.times) throw InvalidArgument("truncation_change: time grids differ");
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < fine.F.size(); ++i) {
        scale = std::max(scale, std::abs(fine.F[i]));
        diff = std::max(diff, std::abs(coarse.F[i] - fine.F[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

}  // namespace chaology
