#include "chaology/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <lapacke.h>

#include "chaology/error.hpp"

namespace chaology {

namespace {

// Spot check of a handful of eigenpairs with plain loops, independent of the
// BLAS that produced them.
void verify_sample(const Eigen::MatrixXd& a, const Eigen::VectorXd& w, const Eigen::MatrixXd& v) {
    const Eigen::Index n = a.rows(), m = v.cols();
    std::vector<Eigen::Index> cols;
    const Eigen::Index picks = std::min<Eigen::Index>(m, 6);
    for (Eigen::Index i = 0; i < picks; ++i) cols.push_back(picks == 1 ? 0 : i * (m - 1) / (picks - 1));
    double scale = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, j)));
    for (std::size_t x = 0; x < cols.size(); ++x) {
        const Eigen::Index c = cols[x];
        double res = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double acc = -w[c] * v(i, c);
            for (Eigen::Index j = 0; j < n; ++j) acc += a(i, j) * v(j, c);
            res += acc * acc;
        }
        for (std::size_t y = 0; y <= x; ++y) {
            double dot = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) dot += v(i, c) * v(i, cols[y]);
            if (std::abs(dot - (x == y ? 1.0 : 0.0)) > 1e-8)
                throw ConvergenceFailure("eigenvectors failed the orthonormality spot check; if OpenBLAS "
                                         "runs Cooperlake kernels set OPENBLAS_CORETYPE=SkylakeX");
        }
        if (std::sqrt(res) > 1e-8 * std::max(1.0, scale) * double(n))
            throw ConvergenceFailure("eigenpairs failed the residual spot check; if OpenBLAS runs "
                                     "Cooperlake kernels set OPENBLAS_CORETYPE=SkylakeX");
    }
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::MatrixXd> symmetric_eigen(Eigen::MatrixXd a,
                                                            std::optional<std::size_t> k_lowest) {
    const lapack_int n = lapack_int(a.rows());
    if (a.rows() != a.cols()) throw InvalidArgument("symmetric_eigen: matrix is not square");
    if (n == 0) throw InvalidArgument("symmetric_eigen: empty matrix");
    if (k_lowest && (*k_lowest == 0 || *k_lowest > std::size_t(n)))
        throw InvalidArgument("symmetric_eigen: k_lowest must be in [1, dim]");

    const Eigen::MatrixXd original = a;
    if (!k_lowest || *k_lowest == std::size_t(n)) {
        Eigen::VectorXd w(n);
        const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, a.data(), n, w.data());
        if (info != 0)
            throw ConvergenceFailure("dsyevd failed with info=" + std::to_string(info));
        verify_sample(original, w, a);
        return {std::move(w), std::move(a)};
    }

    const lapack_int k = lapack_int(*k_lowest);
    Eigen::VectorXd w(n);
    Eigen::MatrixXd z(n, k);
    std::vector<lapack_int> isuppz(2 * std::size_t(k));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, a.data(), n, 0.0,
                                           0.0, 1, k, 0.0, &found, w.data(), z.data(), n,
                                           isuppz.data());
    if (info != 0) throw ConvergenceFailure("dsyevr failed with info=" + std::to_string(info));
    if (found != k)
        throw ConvergenceFailure("dsyevr returned " + std::to_string(found) + " of " +
                                 std::to_string(k) + " requested pairs");
    Eigen::VectorXd values = w.head(k);
    verify_sample(original, values, z);
    return {std::move(values), std::move(z)};
}

void orient_degenerate(const Eigen::VectorXd& values, Eigen::MatrixXd& vectors,
                       const std::vector<std::size_t>& perm, double gap) {
    const Eigen::Index count = values.size();
    const Eigen::Index dim = vectors.rows();
    Eigen::Index start = 0;
    while (start < count) {
        Eigen::Index end = start + 1;
        while (end < count && values[end] - values[end - 1] < gap) ++end;
        const Eigen::Index c = end - start;
        if (c > 1 && !perm.empty()) {
            auto block = vectors.middleCols(start, c);
            Eigen::MatrixXd pb(dim, c);
            for (Eigen::Index r = 0; r < dim; ++r) pb.row(r) = block.row(Eigen::Index(perm[std::size_t(r)]));
            Eigen::MatrixXd s = block.transpose() * pb;
            s = 0.5 * (s + s.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
            Eigen::MatrixXd rotated = block * es.eigenvectors();
            // re-orthonormalize against the rounding of the rotation
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(rotated);
            Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, c);
            for (Eigen::Index j = 0; j < c; ++j)
                if (q.col(j).dot(rotated.col(j)) < 0) q.col(j) *= -1.0;
            block = q;
        }
        start = end;
    }
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        Eigen::Index idx = 0;
        vectors.col(j).cwiseAbs().maxCoeff(&idx);
        if (vectors(idx, j) < 0) vectors.col(j) *= -1.0;
    }
}

EigenDecomposition solve(const HamiltonianMatrix& h, std::optional<std::size_t> k_lowest) {
    auto [values, vectors] = symmetric_eigen(h.entries, k_lowest);
    orient_degenerate(values, vectors, h.grid.parity_permutation());
    EigenDecomposition eig;
    eig.eigenvalues = std::move(values);
    eig.eigenvectors = std::move(vectors);
    eig.eigenvectors /= std::sqrt(h.grid.weight);
    eig.grid = h.grid;
    eig.params = h.params;
    eig.stencil = h.stencil;
    return eig;
}

double max_residual(const HamiltonianMatrix& h, const EigenDecomposition& eig) {
    const Eigen::MatrixXd hv = h.entries * eig.eigenvectors;
    double worst = 0.0;
    for (Eigen::Index n = 0; n < eig.eigenvectors.cols(); ++n) {
        const double e = eig.eigenvalues[n];
        const double r = (hv.col(n) - e * eig.eigenvectors.col(n)).norm() /
                         (eig.eigenvectors.col(n).norm() * std::max(1.0, std::abs(e)));
        worst = std::max(worst, r);
    }
    return worst;
}

std::size_t ErrorReport::count_within(double t) const {
    std::size_t n = 0;
    while (n < levels.size() && levels[n].ratio <= t) ++n;
    return n;
}

ErrorReport estimate_errors(const EigenDecomposition& a, const EigenDecomposition& b,
                            double threshold) {
    if (!(a.params == b.params))
        throw ParamMismatch("estimate_errors: decompositions come from different parameters");
    const std::size_t n = std::min(a.count(), b.count());
    ErrorReport rep;
    rep.threshold = threshold;
    rep.levels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ea = a.eigenvalues[Eigen::Index(i)], eb = b.eigenvalues[Eigen::Index(i)];
        const double diff = std::abs(ea - eb);
        const double sum = std::abs(ea + eb);
        double ratio = 0.0;
        if (diff > 0.0) ratio = sum > 0.0 ? diff / sum : std::numeric_limits<double>::infinity();
        rep.levels[i] = {i, ratio};
    }
    rep.reliable_count = rep.count_within(threshold);
    return rep;
}

LineFit fit_linear_spectrum(std::span<const double> e, std::size_t n_lo, std::size_t n_hi) {
    if (n_hi >= e.size())
        throw RangeError("fit_linear_spectrum: level " + std::to_string(n_hi) + " beyond the " +
                         std::to_string(e.size()) + " available");
    if (n_lo >= n_hi) throw RangeError("fit_linear_spectrum: need n_lo < n_hi");
    std::vector<double> x(n_hi - n_lo + 1);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = double(n_lo + i);
    return fit_line(x, e.subspan(n_lo, x.size()));
}

LineFit fit_linear_spectrum(const EigenDecomposition& eig, std::size_t n_lo, std::size_t n_hi) {
    return fit_linear_spectrum(std::span<const double>(eig.eigenvalues.data(), eig.count()), n_lo,
                               n_hi);
}

}  // namespace chaology
