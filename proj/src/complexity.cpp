#include "chaology/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "chaology/error.hpp"
#include "chaology/parallel.hpp"

namespace chaology {

namespace {

using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

// Re of the weighted Gram matrix ⟨ξi ψ|ξj ψ⟩, optionally minus ⟨ξi⟩⟨ξj⟩.
Eigen::MatrixXd gram(const std::vector<Eigen::VectorXcd>& xi, const Eigen::VectorXcd& psi,
                     double weight, bool centered) {
    const std::size_t d = xi.size();
    Eigen::MatrixXd g(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            const double v = weight * xi[i].dot(xi[j]).real();
            g(Eigen::Index(i), Eigen::Index(j)) = v;
            g(Eigen::Index(j), Eigen::Index(i)) = v;
        }
    if (centered) {
        Eigen::VectorXd mean(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) mean[Eigen::Index(i)] = weight * psi.dot(xi[i]).real();
        g -= mean * mean.transpose();
    }
    return g;
}

}  // namespace

double ComplexityConfig::resolved_ell_eff(const PendulumParams& p) const {
    const double l = ell_eff ? *ell_eff : p.l1 + p.l2;
    if (!(l > 0.0)) throw InvalidArgument("complexity: ell_eff must be positive");
    return l;
}

double ComplexityConfig::resolved_k(const PendulumParams& p) const {
    if (k) {
        if (!(*k > 0.0)) throw InvalidArgument("complexity: k must be positive");
        return *k;
    }
    if (!(p.g > 0.0)) throw InvalidArgument("complexity: default k needs g > 0");
    return 2.0 * pi * std::sqrt(resolved_ell_eff(p) / p.g);
}

PendulumParams perturbed_hamiltonian(const PendulumParams& params, double epsilon) {
    if (!(std::abs(epsilon) < 1.0)) throw InvalidArgument("perturbed_hamiltonian: |epsilon| must be below 1");
    PendulumParams p = params;
    p.l1 = params.l1 * (1.0 + epsilon);
    p.l2 = params.l2 * (1.0 - epsilon);
    return p;
}

namespace {

void check_same_grid(const EigenDecomposition& a, const EigenDecomposition& b) {
    if (!(a.grid == b.grid) || a.dim() != b.dim())
        throw GridMismatch("complexity: decompositions live on different grids");
}

std::size_t resolve_m(const EigenDecomposition& eig, std::optional<std::size_t> M) {
    const std::size_t m = M ? *M : eig.count();
    if (m == 0 || m > eig.count())
        throw TruncationError("complexity: M=" + std::to_string(m) + " outside [1, " +
                              std::to_string(eig.count()) + "]");
    return m;
}

// Σ_m e^{iE'_m t} c_m Ψ'_m
Eigen::VectorXcd evolve(const EigenDecomposition& eig, std::size_t m, const Eigen::VectorXcd& c, double t) {
    Eigen::VectorXd re(static_cast<Eigen::Index>(m)), im(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < Eigen::Index(m); ++i) {
        const cd z = std::polar(1.0, eig.eigenvalues[i] * t) * c[i];
        re[i] = z.real();
        im[i] = z.imag();
    }
    const auto vecs = eig.eigenvectors.leftCols(Eigen::Index(m));
    Eigen::VectorXcd out(vecs.rows());
    out.real() = vecs * re;
    out.imag() = vecs * im;
    return out;
}

Eigen::VectorXcd coefficients(const EigenDecomposition& eig, std::size_t m, const Eigen::VectorXcd& state) {
    const auto vecs = eig.eigenvectors.leftCols(Eigen::Index(m));
    Eigen::VectorXcd c(static_cast<Eigen::Index>(m));
    c.real() = eig.grid.weight * (vecs.transpose() * state.real());
    c.imag() = eig.grid.weight * (vecs.transpose() * state.imag());
    return c;
}

}  // namespace

Eigen::VectorXcd target_state(const EigenDecomposition& eig_h, const EigenDecomposition& eig_hp,
                              const Eigen::VectorXcd& reference, double t, std::optional<std::size_t> M) {
    check_same_grid(eig_h, eig_hp);
    if (std::size_t(reference.size()) != eig_h.dim()) throw GridMismatch("target_state: reference has the wrong length");
    const Eigen::VectorXcd a = coefficients(eig_h, eig_h.count(), reference);
    const Eigen::VectorXcd psi_t = evolve(eig_h, eig_h.count(), a, -t);
    const std::size_t m = resolve_m(eig_hp, M);
    return evolve(eig_hp, m, coefficients(eig_hp, m, psi_t), t);
}

Eigen::VectorXcd target_state(const EigenDecomposition& eig_h, const EigenDecomposition& eig_hp, double t,
                              std::optional<std::size_t> M) {
    const Eigen::VectorXcd ref = eig_h.eigenvectors.col(0).cast<cd>();
    return target_state(eig_h, eig_hp, ref, t, M);
}

double grid_norm(const Eigen::VectorXcd& state, const Grid2D& grid) {
    return state.squaredNorm() * grid.weight;
}

Eigen::Matrix4d covariance(const Eigen::VectorXcd& psi, const Grid2D& grid, const CovarianceOptions& opts) {
    if (std::size_t(psi.size()) != grid.dim()) throw GridMismatch("covariance: state does not match the grid");
    const double angle_scale = opts.angle_scaling == AngleScaling::divided_by_k ? 1.0 / opts.k : 1.0;
    std::vector<Eigen::VectorXcd> xi(4, Eigen::VectorXcd(psi.size()));
    for (Eigen::Index k = 0; k < psi.size(); ++k) {
        xi[0][k] = angle_scale * grid.angle1_at(std::size_t(k)) * psi[k];
        xi[1][k] = angle_scale * grid.angle2_at(std::size_t(k)) * psi[k];
    }
    // k·p = −iħk·D
    const cd mom(0.0, -opts.hbar * opts.k);
    xi[2] = mom * apply_axis1(build_diff_ops(grid.n1, opts.stencil).d1, psi, grid).col(0);
    xi[3] = mom * apply_axis2(build_diff_ops(grid.n2, opts.stencil).d1, psi, grid).col(0);
    return gram(xi, psi, grid.weight, opts.centered);
}

ComplexityValue complexity_value(const Eigen::MatrixXd& g_ref, const Eigen::MatrixXd& g_target) {
    if (g_ref.rows() != g_ref.cols() || g_ref.rows() != g_target.rows() || g_target.rows() != g_target.cols())
        throw InvalidArgument("complexity_value: covariance shapes disagree");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_r(0.5 * (g_ref + g_ref.transpose()));
    const Eigen::VectorXd r = es_r.eigenvalues();
    ComplexityValue out;
    out.condition_reference = r.minCoeff() > 0.0 ? r.maxCoeff() / r.minCoeff()
                                                 : std::numeric_limits<double>::infinity();
    if (!(out.condition_reference <= 1e12))
        throw SingularReference("complexity_value: reference covariance condition number " +
                                std::to_string(out.condition_reference) + " exceeds 1e12");
    const Eigen::MatrixXd u = es_r.eigenvectors();
    const Eigen::MatrixXd inv_sqrt = u * r.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
    Eigen::MatrixXd s = inv_sqrt * g_target * inv_sqrt;
    s = 0.5 * (s + s.transpose()).eval();
    out.deltas = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s, Eigen::EigenvaluesOnly).eigenvalues();
    if (out.deltas.minCoeff() <= 0.0)
        throw NonPositiveDelta("complexity_value: eigenvalue " + std::to_string(out.deltas.minCoeff()) +
                               " of the symmetrized covariance ratio is not positive");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < out.deltas.size(); ++i) {
        const double l = std::log(out.deltas[i]);
        sum += l * l;
    }
    out.value = std::sqrt(sum) / (2.0 * std::numbers::sqrt2);
    return out;
}

LineFit last_half_fit(std::span<const double> times, std::span<const double> values, double* t_lo, double* t_hi) {
    if (times.size() != values.size()) throw InvalidArgument("last_half_fit: size mismatch");
    const std::size_t start = times.size() / 2;
    const auto t = times.subspan(start);
    if (t_lo && !t.empty()) *t_lo = t.front();
    if (t_hi && !t.empty()) *t_hi = t.back();
    return fit_line(t, values.subspan(start));
}

namespace {

void check_times(std::span<const double> times) {
    if (times.size() < 4) throw InsufficientData("complexity_series: need at least 4 times");
    if (times[0] != 0.0) throw InvalidArgument("complexity_series: times must start at 0");
}

double gaussianity(const Eigen::VectorXcd& psi, const std::vector<double>& coord, double weight) {
    double m2 = 0.0, m4 = 0.0;
    for (Eigen::Index k = 0; k < psi.size(); ++k) {
        const double p = std::norm(psi[k]) * weight;
        const double x2 = coord[std::size_t(k)] * coord[std::size_t(k)];
        m2 += p * x2;
        m4 += p * x2 * x2;
    }
    return m4 / (3.0 * m2 * m2) - 1.0;
}

// Shared time loop: `target(t)` gives the evolved state, `cov` its covariance.
template <class Target, class Cov>
void fill_series(ComplexitySeries& out, const Eigen::MatrixXd& g_ref, std::span<const double> times,
                 double weight, unsigned threads, Target&& target, Cov&& cov) {
    out.times.assign(times.begin(), times.end());
    out.C.resize(times.size());
    std::vector<double> norm_err(times.size()), min_delta(times.size());
    parallel_for(times.size(), threads, [&](std::size_t i) {
        const Eigen::VectorXcd psi = target(times[i]);
        norm_err[i] = std::abs(psi.squaredNorm() * weight - 1.0);
        const auto v = complexity_value(g_ref, cov(psi));
        out.C[i] = v.value;
        min_delta[i] = v.deltas.minCoeff();
    });
    out.max_norm_error = *std::max_element(norm_err.begin(), norm_err.end());
    out.min_delta = *std::min_element(min_delta.begin(), min_delta.end());
    if (out.max_norm_error > 1e-8)
        throw TruncationError("complexity_series: evolved state norm drifts by " +
                              std::to_string(out.max_norm_error) + "; increase M");
    out.linear_fit = last_half_fit(out.times, out.C, &out.fit_t_lo, &out.fit_t_hi);
}

}  // namespace

ComplexitySeries complexity_series(const EigenDecomposition& eig_h, const EigenDecomposition& eig_hp,
                                   const ComplexityConfig& config, std::span<const double> times) {
    check_same_grid(eig_h, eig_hp);
    check_times(times);
    const std::size_t m = resolve_m(eig_hp, config.M);

    ComplexitySeries out;
    out.epsilon = config.epsilon;
    out.ell_eff = config.resolved_ell_eff(eig_h.params);
    out.k = config.resolved_k(eig_h.params);
    CovarianceOptions co;
    co.k = out.k;
    co.hbar = eig_h.params.hbar;
    co.centered = config.centered;
    co.angle_scaling = config.angle_scaling;
    co.stencil = eig_h.stencil;

    const Eigen::VectorXcd psi0 = eig_h.eigenvectors.col(0).cast<cd>();
    out.reference_covariance = covariance(psi0, eig_h.grid, co);
    out.gaussianity_deficit = {gaussianity(psi0, [&] {
                                   std::vector<double> c(eig_h.dim());
                                   for (std::size_t k = 0; k < c.size(); ++k) c[k] = eig_h.grid.angle1_at(k);
                                   return c;
                               }(), eig_h.grid.weight),
                               gaussianity(psi0, [&] {
                                   std::vector<double> c(eig_h.dim());
                                   for (std::size_t k = 0; k < c.size(); ++k) c[k] = eig_h.grid.angle2_at(k);
                                   return c;
                               }(), eig_h.grid.weight)};

    // Ψ0 is an eigenstate of H, so e^{−iHt} only contributes a global phase
    const Eigen::VectorXcd c = coefficients(eig_hp, m, psi0);
    const Eigen::MatrixXd g_ref = out.reference_covariance;
    fill_series(
        out, g_ref, times, eig_h.grid.weight, config.threads,
        [&](double t) { return evolve(eig_hp, m, c, t); },
        [&](const Eigen::VectorXcd& psi) { return Eigen::MatrixXd(covariance(psi, eig_h.grid, co)); });
    return out;
}

ComplexitySeries single_pendulum_series(double m, double l, double g, double hbar, int n,
                                        const ComplexityConfig& config, std::span<const double> times) {
    if (!(m > 0.0) || !(l > 0.0) || !(g >= 0.0) || !(hbar > 0.0))
        throw InvalidArgument("single_pendulum_series: m, l, hbar must be positive and g non-negative");
    check_times(times);
    if (!(std::abs(config.epsilon) < 1.0)) throw InvalidArgument("single_pendulum_series: |epsilon| must be below 1");

    const DiffOps ops = build_diff_ops(n);
    const double h = 2.0 * pi / n;
    std::vector<double> theta(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) theta[std::size_t(j)] = h * (double(j) - 0.5 * n);
    std::vector<double> angle = theta;
    angle[0] = 0.0;

    auto decompose = [&](double length) {
        Eigen::MatrixXd H = (-hbar * hbar / (2.0 * m * length * length)) * ops.dd1;
        for (int i = 0; i < n; ++i) H(i, i) += m * g * length * (1.0 - std::cos(theta[std::size_t(i)]));
        EigenDecomposition eig;
        auto [vals, vecs] = symmetric_eigen(H);
        orient_degenerate(vals, vecs, {});
        eig.eigenvalues = std::move(vals);
        eig.eigenvectors = std::move(vecs) / std::sqrt(h);
        return eig;
    };
    const EigenDecomposition e0 = decompose(l);
    const EigenDecomposition e1 = decompose(l * (1.0 + config.epsilon));
    const std::size_t mm = resolve_m(e1, config.M);

    ComplexitySeries out;
    out.epsilon = config.epsilon;
    out.ell_eff = config.ell_eff ? *config.ell_eff : l;
    if (!(out.ell_eff > 0.0)) throw InvalidArgument("single_pendulum_series: ell_eff must be positive");
    if (config.k)
        out.k = *config.k;
    else if (g > 0.0)
        out.k = 2.0 * pi * std::sqrt(out.ell_eff / g);
    else
        throw InvalidArgument("single_pendulum_series: default k needs g > 0");
    const double angle_scale = config.angle_scaling == AngleScaling::divided_by_k ? 1.0 / out.k : 1.0;

    auto cov = [&](const Eigen::VectorXcd& psi) {
        std::vector<Eigen::VectorXcd> xi(2, Eigen::VectorXcd(psi.size()));
        for (int i = 0; i < n; ++i) xi[0][i] = angle_scale * angle[std::size_t(i)] * psi[i];
        xi[1] = cd(0.0, -hbar * out.k) * (ops.d1.cast<cd>() * psi);
        return gram(xi, psi, h, config.centered);
    };

    const Eigen::VectorXcd psi0 = e0.eigenvectors.col(0).cast<cd>();
    const Eigen::MatrixXd g_ref = cov(psi0);
    out.reference_covariance.setZero();
    out.reference_covariance.topLeftCorner(2, 2) = g_ref;
    out.gaussianity_deficit = {gaussianity(psi0, angle, h)};

    Eigen::VectorXcd c(static_cast<Eigen::Index>(mm));
    c.real() = h * (e1.eigenvectors.leftCols(Eigen::Index(mm)).transpose() * psi0.real());
    c.imag().setZero();
    fill_series(out, g_ref, times, h, config.threads, [&](double t) { return evolve(e1, mm, c, t); }, cov);
    return out;
}

}  // namespace chaology
