#include "chaology/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "chaology/error.hpp"
#include "chaology/parallel.hpp"

namespace chaology {

namespace {

constexpr double pi = std::numbers::pi;

double sign_alt(int m) { return (m % 2 == 0) ? 1.0 : -1.0; }

std::vector<double> uniform_points(int n) {
    std::vector<double> pts(static_cast<std::size_t>(n));
    // (2π/n)(j − n/2): the half-integer offset for odd n is exact, so the
    // mirror point of j is bit-exactly −θ_j
    for (int j = 0; j < n; ++j) pts[std::size_t(j)] = (2.0 * pi / n) * (double(j) - 0.5 * n);
    return pts;
}

// Circulant matrix with entry (i, j) = f[(i − j) mod n].
Eigen::MatrixXd circulant(const std::vector<double>& f) {
    const int n = int(f.size());
    Eigen::MatrixXd m(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) m(i, j) = f[std::size_t(((i - j) % n + n) % n)];
    return m;
}

DiffOps fourier_ops(int n) {
    const double h = 2.0 * pi / n;
    std::vector<double> f(std::size_t(n), 0.0), g(std::size_t(n), 0.0);
    const bool even = n % 2 == 0;
    g[0] = even ? -double(n) * n / 12.0 - 1.0 / 6.0 : -double(n) * n / 12.0 + 1.0 / 12.0;
    for (int m = 1; 2 * m <= n; ++m) {
        const double x = 0.5 * m * h;
        const double s = std::sin(x);
        double fm, gm;
        if (even) {
            fm = (2 * m == n) ? 0.0 : 0.5 * sign_alt(m) * std::cos(x) / s;
            gm = -0.5 * sign_alt(m) / (s * s);
        } else {
            fm = 0.5 * sign_alt(m) / s;
            gm = -0.5 * sign_alt(m) * std::cos(x) / (s * s);
        }
        f[std::size_t(m)] = fm;
        g[std::size_t(m)] = gm;
        if (2 * m != n) {
            f[std::size_t(n - m)] = -fm;
            g[std::size_t(n - m)] = gm;
        }
    }
    return {circulant(f), circulant(g), Stencil::fourier};
}

// Toeplitz rows exactly as the closed forms with (N+1) denominators read:
// first row c_m = (−1)^m/2·cot(mπ/(N+1)), diagonal −N²/12 − 1/6.
DiffOps paper_literal_ops(int n) {
    Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd dd1(n, n);
    const double diag = -double(n) * n / 12.0 - 1.0 / 6.0;
    for (int m = 0; m < n; ++m) {
        double c = 0.0, cc = diag;
        if (m > 0) {
            const double x = m * pi / (n + 1);
            c = (2 * m == n + 1) ? 0.0 : 0.5 * sign_alt(m) * std::cos(x) / std::sin(x);
            cc = -0.5 * sign_alt(m) / (std::sin(x) * std::sin(x));
        }
        for (int i = 0; i + m < n; ++i) {
            d1(i, i + m) = c;
            d1(i + m, i) = -c;
            dd1(i, i + m) = cc;
            dd1(i + m, i) = cc;
        }
    }
    return {d1, dd1, Stencil::paper_literal};
}

}  // namespace

Grid2D Grid2D::uniform(int n1, int n2) {
    if (n1 < 3 || n2 < 3) throw InvalidArgument("grid needs at least 3 points per angle");
    Grid2D g;
    g.n1 = n1;
    g.n2 = n2;
    g.theta1_points = uniform_points(n1);
    g.theta2_points = uniform_points(n2);
    g.weight = (2.0 * pi / n1) * (2.0 * pi / n2);
    return g;
}

std::vector<std::size_t> Grid2D::parity_permutation() const {
    std::vector<std::size_t> perm(dim());
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) perm[index(i, j)] = index((n1 - i) % n1, (n2 - j) % n2);
    return perm;
}

const char* to_string(Stencil s) {
    return s == Stencil::fourier ? "fourier" : "paper-literal";
}

Stencil stencil_from_string(const std::string& s) {
    if (s == "fourier") return Stencil::fourier;
    if (s == "paper-literal") return Stencil::paper_literal;
    throw InvalidArgument("unknown stencil '" + s + "'");
}

DiffOps build_diff_ops(int n, Stencil stencil) {
    if (n < 3) throw InvalidArgument("build_diff_ops: n must be at least 3");
    return stencil == Stencil::fourier ? fourier_ops(n) : paper_literal_ops(n);
}

std::size_t dense_bytes(std::size_t dim) { return dim * dim * sizeof(double); }

NodeCoefficients sample_coefficients(const PendulumParams& params, const Grid2D& grid) {
    params.validate();
    const std::size_t dim = grid.dim();
    const double h2 = params.hbar * params.hbar;
    NodeCoefficients nc;
    nc.a.resize(Eigen::Index(dim));
    nc.b.resize(Eigen::Index(dim));
    nc.c.resize(Eigen::Index(dim));
    nc.v.resize(Eigen::Index(dim));
    for (std::size_t k = 0; k < dim; ++k) {
        const auto co = inertia_coefficients(params, grid.theta1_at(k), grid.theta2_at(k));
        const auto i = Eigen::Index(k);
        nc.a[i] = -h2 * co.inv2I1;
        nc.b[i] = -h2 * co.inv2I2;
        nc.c[i] = -h2 * co.invI12;
        nc.v[i] = co.V;
    }
    return nc;
}

Eigen::MatrixXd assemble_operator(const Grid2D& grid, const NodeCoefficients& nc, const AssemblyOptions& opts) {
    const std::size_t dim = grid.dim();
    if (dim == 0) throw InvalidArgument("assemble_operator: empty grid");
    if (std::size_t(nc.a.size()) != dim || std::size_t(nc.b.size()) != dim || std::size_t(nc.c.size()) != dim ||
        std::size_t(nc.v.size()) != dim)
        throw InvalidArgument("assemble_operator: coefficient vectors do not match the grid");
    if (dense_bytes(dim) > opts.memory_budget_bytes)
        throw DimensionOverflow("Hamiltonian of dimension " + std::to_string(dim) + " needs " +
                                std::to_string(dense_bytes(dim)) + " bytes, budget is " +
                                std::to_string(opts.memory_budget_bytes));

    const DiffOps ops1 = build_diff_ops(grid.n1, opts.stencil);
    const DiffOps ops2 = build_diff_ops(grid.n2, opts.stencil);
    const auto& a = nc.a;
    const auto& b = nc.b;
    const auto& c = nc.c;
    const auto n = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd h(n, n);

    const int n1 = grid.n1, n2 = grid.n2;
    // column-major storage: fill column l, rows k; every term is symmetric in
    // (k, l) operand-by-operand, so H(k,l) and H(l,k) round identically
    parallel_for(dim, opts.threads, [&](std::size_t l) {
        const int i2 = int(l) / n2, j2 = int(l) % n2;
        const auto li = Eigen::Index(l);
        double* col = h.col(li).data();
        for (int i = 0; i < n1; ++i) {
            const double d1 = ops1.d1(i, i2);
            const double dd1 = ops1.dd1(i, i2);
            for (int j = 0; j < n2; ++j) {
                const auto k = Eigen::Index(grid.index(i, j));
                double val = (k == li) ? nc.v[k] : 0.0;
                if (j == j2) val += 0.5 * (a[k] + a[li]) * dd1;
                if (i == i2) val += 0.5 * (b[k] + b[li]) * ops2.dd1(j, j2);
                val += 0.5 * (c[k] + c[li]) * (d1 * ops2.d1(j, j2));
                col[k] = val;
            }
        }
    });
    return h;
}

HamiltonianMatrix assemble_hamiltonian(const PendulumParams& params, const Grid2D& grid,
                                       const AssemblyOptions& opts) {
    params.validate();
    if (dense_bytes(grid.dim()) > opts.memory_budget_bytes)
        throw DimensionOverflow("Hamiltonian of dimension " + std::to_string(grid.dim()) + " needs " +
                                std::to_string(dense_bytes(grid.dim())) + " bytes, budget is " +
                                std::to_string(opts.memory_budget_bytes));
    HamiltonianMatrix h;
    h.entries = assemble_operator(grid, sample_coefficients(params, grid), opts);
    h.grid = grid;
    h.params = params;
    h.stencil = opts.stencil;
    return h;
}

}  // namespace chaology
