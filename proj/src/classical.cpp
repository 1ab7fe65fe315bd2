#include "chaology/classical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "chaology/error.hpp"
#include "chaology/fitting.hpp"
#include "chaology/parallel.hpp"

namespace odeint = boost::numeric::odeint;

namespace chaology {

double Trajectory::max_relative_energy_drift() const {
    if (energy.empty()) return 0.0;
    const double e0 = energy.front();
    const double scale = std::max(1.0, std::abs(e0));
    double worst = 0.0;
    for (double e : energy) worst = std::max(worst, std::abs(e - e0) / scale);
    return worst;
}

PhaseState equations_of_motion(const PendulumParams& params, const PhaseState& s) {
    const auto c = inertia_coefficients(params, s.theta1, s.theta2);
    const auto d = coefficient_gradients(params, s.theta1, s.theta2);
    // the kinetic coefficients depend on θ1 − θ2 only
    const double dK_ddelta =
        d.d_inv2I1 * s.p1 * s.p1 + d.d_inv2I2 * s.p2 * s.p2 + d.d_invI12 * s.p1 * s.p2;
    return {
        2.0 * c.inv2I1 * s.p1 + c.invI12 * s.p2,
        2.0 * c.inv2I2 * s.p2 + c.invI12 * s.p1,
        -dK_ddelta - d.dV_dtheta1,
        dK_ddelta - d.dV_dtheta2,
    };
}

namespace {

constexpr double min_step = 1e-12;

template <std::size_t N>
using State = std::array<double, N>;

PhaseState unpack(const double* x) { return {x[0], x[1], x[2], x[3]}; }

void pack(const PhaseState& s, double* x) {
    x[0] = s.theta1;
    x[1] = s.theta2;
    x[2] = s.p1;
    x[3] = s.p2;
}

// Controller tolerance chosen so the accumulated energy error stays below tol.
double controller_tolerance(double tol) { return std::clamp(tol * 1e-4, 1e-14, 1e-6); }

void check_options(const IntegrationOptions& o) {
    if (!(o.t_max > 0.0)) throw InvalidArgument("integrate: t_max must be positive");
    if (!(o.dt > 0.0)) throw InvalidArgument("integrate: dt must be positive");
    if (!(o.tol > 0.0)) throw InvalidArgument("integrate: tol must be positive");
}

std::size_t sample_count(const IntegrationOptions& o) {
    return static_cast<std::size_t>(std::floor(o.t_max / o.dt + 1e-9)) + 1;
}

// Integrates `blocks` independent copies of the pendulum packed into one state,
// sharing one step sequence. `observe(i, t, x)` receives every sample.
template <std::size_t N, class Observer>
void run(const PendulumParams& params, const State<N>& x0, const IntegrationOptions& o,
         Observer&& observe) {
    static_assert(N % 4 == 0);
    auto rhs = [&params](const State<N>& x, State<N>& dxdt, double) {
        for (std::size_t b = 0; b < N; b += 4) pack(equations_of_motion(params, unpack(&x[b])), &dxdt[b]);
    };

    const double eps = controller_tolerance(o.tol);
    auto stepper = odeint::make_dense_output(eps, eps, odeint::runge_kutta_dopri5<State<N>>());
    stepper.initialize(x0, 0.0, std::min(o.dt, 1e-3));

    const std::size_t n = sample_count(o);
    State<N> x = x0;
    observe(0, 0.0, x);
    try {
        for (std::size_t i = 1; i < n; ++i) {
            const double t = double(i) * o.dt;
            while (stepper.current_time() < t) {
                stepper.do_step(rhs);
                if (stepper.current_time() < t && stepper.current_time_step() < min_step)
                    throw StepFailure("integrate: step size fell below 1e-12 at t=" +
                                      std::to_string(stepper.current_time()));
            }
            stepper.calc_state(t, x);
            observe(i, t, x);
        }
    } catch (const odeint::odeint_error& e) {
        throw StepFailure(std::string("integrate: ") + e.what());
    }
}

}  // namespace

Trajectory integrate(const PendulumParams& params, const PhaseState& initial,
                     const IntegrationOptions& opts) {
    params.validate();
    check_options(opts);
    const std::size_t n = sample_count(opts);
    Trajectory tr;
    tr.times.resize(n);
    tr.states.resize(n);
    tr.lifted.resize(n);
    tr.energy.resize(n);

    State<4> x0;
    pack(initial, x0.data());
    run<4>(params, x0, opts, [&](std::size_t i, double t, const State<4>& x) {
        tr.times[i] = t;
        tr.lifted[i] = unpack(x.data());
        tr.states[i] = wrapped(tr.lifted[i]);
        tr.energy[i] = hamiltonian_value(params, tr.lifted[i]);
    });
    return tr;
}

double default_balancing_constant(const PendulumParams& params) {
    if (!(params.g > 0.0))
        throw InvalidArgument("balancing constant 2π·sqrt(l_eff/g) needs g > 0");
    return 2.0 * std::numbers::pi * std::sqrt((params.l1 + params.l2) / params.g);
}

DivergenceSeries divergence(const PendulumParams& params, const PhaseState& ic_a,
                            const PhaseState& ic_b, double k, const IntegrationOptions& opts) {
    params.validate();
    check_options(opts);
    if (!(k > 0.0)) throw InvalidArgument("divergence: k must be positive");

    const std::size_t n = sample_count(opts);
    const double k4 = k * k * k * k;
    DivergenceSeries out;
    out.k = k;
    out.times.resize(n);
    out.delta_omega.resize(n);
    out.delta_omega_paper.resize(n);

    State<8> x0;
    pack(ic_a, x0.data());
    pack(ic_b, x0.data() + 4);
    const double ea0 = hamiltonian_value(params, ic_a);
    const double eb0 = hamiltonian_value(params, ic_b);

    run<8>(params, x0, opts, [&](std::size_t i, double t, const State<8>& x) {
        const PhaseState a = unpack(x.data());
        const PhaseState b = unpack(x.data() + 4);
        const double dq2 = (b.theta1 - a.theta1) * (b.theta1 - a.theta1) +
                           (b.theta2 - a.theta2) * (b.theta2 - a.theta2);
        const double dp2 = (b.p1 - a.p1) * (b.p1 - a.p1) + (b.p2 - a.p2) * (b.p2 - a.p2);
        const double na = a.theta1 * a.theta1 + a.theta2 * a.theta2 +
                          k4 * (a.p1 * a.p1 + a.p2 * a.p2);
        const double nb = b.theta1 * b.theta1 + b.theta2 * b.theta2 +
                          k4 * (b.p1 * b.p1 + b.p2 * b.p2);
        const double lit = nb - na;
        out.times[i] = t;
        out.delta_omega[i] = std::sqrt(dq2 + k4 * dp2);
        out.delta_omega_paper[i] = std::copysign(std::sqrt(std::abs(lit)), lit);

        const double sa = std::max(1.0, std::abs(ea0));
        const double sb = std::max(1.0, std::abs(eb0));
        out.energy_drift_a = std::max(out.energy_drift_a, std::abs(hamiltonian_value(params, a) - ea0) / sa);
        out.energy_drift_b = std::max(out.energy_drift_b, std::abs(hamiltonian_value(params, b) - eb0) / sb);
    });
    return out;
}

LyapunovFit fit_lyapunov(const DivergenceSeries& series, FitMode mode, bool use_paper_literal) {
    const auto& d = use_paper_literal ? series.delta_omega_paper : series.delta_omega;
    const std::size_t n = std::min(series.times.size(), d.size());

    LyapunovFit fit;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] >= 1.0) {
            if (i == 0) {
                fit.t_star = series.times[0];
            } else {
                const double f = (1.0 - d[i - 1]) / (d[i] - d[i - 1]);
                fit.t_star = series.times[i - 1] + f * (series.times[i] - series.times[i - 1]);
            }
            break;
        }
    }

    std::vector<double> t, lg;
    for (std::size_t i = 0; i < n; ++i) {
        if (mode == FitMode::until_order_one && fit.t_star && series.times[i] >= *fit.t_star)
            break;
        if (d[i] > 0.0) {
            t.push_back(series.times[i]);
            lg.push_back(std::log10(d[i]));
        }
    }
    if (t.size() < 10)
        throw InsufficientData("fit_lyapunov: " + std::to_string(t.size()) +
                               " positive samples in window, need 10");

    const auto line = fit_line(t, lg);
    fit.a1 = line.intercept;
    fit.a2 = line.slope;
    fit.lambda_L = line.slope * std::numbers::ln10;
    fit.rms = line.rms;
    fit.t_lo = t.front();
    fit.t_hi = t.back();
    fit.samples = t.size();
    return fit;
}

std::pair<PhaseState, PhaseState> reference_initial_pair() {
    constexpr double pi = std::numbers::pi;
    PhaseState a{0.99 * pi / 2.0, 0.99 * pi, 0.0, 0.0};
    PhaseState b = a;
    b.theta2 += 1e-6 * pi;
    return {a, b};
}

std::vector<SweepRow> sweep_g(const PendulumParams& base, const std::vector<double>& g_list,
                              const PhaseState& ic_a, const PhaseState& ic_b,
                              const SweepOptions& opts) {
    if (g_list.empty()) throw InvalidArgument("sweep_g: empty g list");
    std::vector<SweepRow> rows(g_list.size());
    parallel_for(g_list.size(), opts.threads, [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.g = g_list[i];
        try {
            PendulumParams p = base;
            p.g = g_list[i];
            const double k = opts.k ? *opts.k : default_balancing_constant(p);
            const auto series = divergence(p, ic_a, ic_b, k, opts.integration);
            const auto fit = fit_lyapunov(series, opts.mode);
            row.lambda_L = fit.lambda_L;
            row.t_star = fit.t_star;
            row.rms = fit.rms;
            row.energy_drift = std::max(series.energy_drift_a, series.energy_drift_b);
        } catch (const Error& e) {
            row.error = e.code() + ": " + e.what();
        }
    });
    return rows;
}

}  // namespace chaology
