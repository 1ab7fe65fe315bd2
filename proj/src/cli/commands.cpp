#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "chaology/blas_guard.hpp"
#include "chaology/classical.hpp"
#include "chaology/cli.hpp"
#include "chaology/complexity.hpp"
#include "chaology/eigensolve.hpp"
#include "chaology/error.hpp"
#include "chaology/levelstats.hpp"
#include "chaology/otoc.hpp"
#include "output.hpp"

namespace chaology::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
constexpr double pi = std::numbers::pi;

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Flags {
    std::string config;
    std::string out;
    bool plot = false;
    std::optional<unsigned> threads;
    std::optional<std::string> profile;
    std::vector<double> g_list;
    std::optional<int> r;
    std::string beta_exp;
    std::optional<std::size_t> M;
    std::vector<int> grids;
};

std::string hex(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

std::string manifest_name(const std::vector<std::string>& command) {
    std::string name = "manifest";
    for (const auto& c : command) name += "_" + c;
    return name + ".json";
}

std::vector<double> linspace(double hi, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = hi * double(i) / double(n - 1);
    return t;
}

std::vector<int> parse_exponents(const std::string& s) {
    std::vector<int> out;
    try {
        const auto dots = s.find("..");
        if (dots != std::string::npos) {
            const int lo = std::stoi(s.substr(0, dots)), hi = std::stoi(s.substr(dots + 2));
            if (hi < lo) throw UsageError("--beta-exp range is empty: " + s);
            for (int e = lo; e <= hi; ++e) out.push_back(e);
            return out;
        }
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    } catch (const std::logic_error&) {
        throw UsageError("--beta-exp expects LO..HI or a comma list, got " + s);
    }
    if (out.empty()) throw UsageError("--beta-exp is empty");
    return out;
}

// Shared state of one command invocation.
struct Context {
    RunConfig cfg;
    fs::path out;
    std::optional<fs::path> cache;
    std::vector<std::string> command;
    json caches = json::array();
    std::vector<std::string> outputs;
    std::ostream& log;

    fs::path file(const std::string& name) {
        outputs.push_back(name);
        return out / name;
    }

    CachedSolve solve(const PendulumParams& p, int n, std::optional<std::size_t> k_lowest) {
        SolveRequest req;
        req.params = p;
        req.n1 = req.n2 = n;
        req.stencil = stencil_from_string(cfg.quantize.stencil);
        req.k_lowest = k_lowest;
        req.memory_budget_bytes = cfg.quantize.memory_budget_mb << 20;
        req.threads = cfg.threads;
        auto s = solve_cached(req, cache);
        log << (s.cache_hit ? "loaded " : "solved ") << n << "x" << n << " g=" << p.g
            << (s.path.empty() ? "" : " (" + s.path.filename().string() + ")") << '\n';
        if (!s.path.empty())
            caches.push_back({{"file", s.path.filename().string()},
                              {"crc64", hex(cache_checksum(s.path))},
                              {"hit", s.cache_hit}});
        return s;
    }

    struct Pair {
        CachedSolve coarse, fine;
        ErrorReport errors;
    };

    Pair solve_pair(const PendulumParams& p) {
        const auto g = cfg.grids();
        Pair out;
        out.coarse = solve(p, g[0], cfg.quantize.k_lowest);
        out.fine = solve(p, g[1], cfg.quantize.k_lowest);
        out.errors = estimate_errors(out.coarse.eig, out.fine.eig, cfg.quantize.threshold);
        return out;
    }

    void write_manifest() {
        json m = {{"manifest_version", 1},
                  {"tool", "chaology"},
                  {"version", tool_version},
                  {"command", command},
                  {"config", config_to_json(cfg)},
                  {"blas_core", blas_core_name()},
                  {"cache_dir", cache ? cache->string() : ""},
                  {"caches", caches},
                  {"outputs", outputs}};
        write_text(out / manifest_name(command), m.dump(2) + "\n");
    }
};

void write_json(Context& ctx, const std::string& name, const json& j) { write_text(ctx.file(name), j.dump(2) + "\n"); }

json fit_json(const LineFit& f) {
    return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"rms", f.rms}, {"slope_stderr", f.slope_stderr}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::pair<PhaseState, PhaseState> initial_pair(const ClassicalBlock& c) {
    if (!c.initial) return reference_initial_pair();
    const auto& v = *c.initial;
    PhaseState a{v[0], v[1], v[2], v[3]};
    PhaseState b = a;
    b.theta2 += c.perturbation;
    return {a, b};
}

IntegrationOptions integration(const ClassicalBlock& c) { return {c.t_max, c.dt, c.tol}; }

FitMode fit_mode(const ClassicalBlock& c) {
    return c.fit_mode == "full_window" ? FitMode::full_window : FitMode::until_order_one;
}

// classical ------------------------------------------------------------------

void classical_simulate(Context& ctx) {
    const auto& c = ctx.cfg.classical;
    const auto traj = integrate(ctx.cfg.params, initial_pair(c).first, integration(c));
    CsvWriter csv(ctx.file("trajectory.csv"), {"t", "theta1", "theta2", "p1", "p2", "energy"});
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& s = traj.states[i];
        csv.row({traj.times[i], s.theta1, s.theta2, s.p1, s.p2, traj.energy[i]});
    }
    csv.close();
    const double drift = traj.max_relative_energy_drift();
    write_json(ctx, "trajectory.json", {{"samples", traj.times.size()}, {"energy_drift", drift}});
    ctx.log << "energy drift " << drift << '\n';
    if (ctx.cfg.plot) {
        std::vector<double> t1, t2;
        for (const auto& s : traj.states) t1.push_back(s.theta1), t2.push_back(s.theta2);
        write_line_plot(ctx.file("trajectory.svg"), {"Trajectory", "t", "angle", false},
                        {{"theta1", traj.times, t1, "#d62728"}, {"theta2", traj.times, t2, "#2ca02c"}});
    }
}

void classical_lyapunov(Context& ctx) {
    const auto& c = ctx.cfg.classical;
    const auto& p = ctx.cfg.params;
    const auto [a, b] = initial_pair(c);
    const double k = c.k ? *c.k : default_balancing_constant(p);
    const auto series = divergence(p, a, b, k, integration(c));
    CsvWriter csv(ctx.file("divergence.csv"), {"t", "delta_omega_std", "delta_omega_paper"});
    for (std::size_t i = 0; i < series.times.size(); ++i)
        csv.row({series.times[i], series.delta_omega[i], series.delta_omega_paper[i]});
    csv.close();
    const auto fit = fit_lyapunov(series, fit_mode(c), c.paper_literal_distance);
    write_json(ctx, "lyapunov.json",
               {{"a1", fit.a1},
                {"a2", fit.a2},
                {"lambda_L", fit.lambda_L},
                {"t_star", optional_json(fit.t_star)},
                {"window", {fit.t_lo, fit.t_hi}},
                {"rms", fit.rms},
                {"samples", fit.samples},
                {"k", k},
                {"g", p.g},
                {"energy_drift", std::max(series.energy_drift_a, series.energy_drift_b)}});
    ctx.log << "lambda_L " << fit.lambda_L << "  t* " << (fit.t_star ? format_number(*fit.t_star) : "none") << '\n';
    if (ctx.cfg.plot) {
        std::vector<double> fx, fy;
        for (double t : {fit.t_lo, fit.t_hi}) fx.push_back(t), fy.push_back(std::pow(10.0, fit.a1 + fit.a2 * t));
        write_line_plot(ctx.file("divergence.svg"), {"Phase-space divergence", "t", "delta Omega", true},
                        {{"delta Omega", series.times, series.delta_omega, "#1f77b4"},
                         {"fit", fx, fy, "#d62728"}});
    }
}

void classical_sweep(Context& ctx) {
    const auto& c = ctx.cfg.classical;
    const auto [a, b] = initial_pair(c);
    SweepOptions opts;
    opts.integration = integration(c);
    opts.k = c.k;
    opts.mode = fit_mode(c);
    opts.threads = ctx.cfg.threads;
    const auto rows = sweep_g(ctx.cfg.params, c.g_list, a, b, opts);
    CsvWriter csv(ctx.file("sweep.csv"), {"g", "lambda", "t_star", "rms"});
    json report = json::array();
    for (const auto& r : rows) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const bool ok = r.error.empty();
        csv.row({r.g, ok ? r.lambda_L : nan, r.t_star.value_or(nan), ok ? r.rms : nan});
        report.push_back({{"g", r.g},
                          {"lambda", r.lambda_L},
                          {"t_star", optional_json(r.t_star)},
                          {"rms", r.rms},
                          {"energy_drift", r.energy_drift},
                          {"error", r.error}});
        ctx.log << "g=" << r.g << " lambda_L " << r.lambda_L << (ok ? "" : "  error: " + r.error) << '\n';
    }
    csv.close();
    write_json(ctx, "sweep.json", report);
    if (ctx.cfg.plot) {
        PlotSeries s{"lambda_L", {}, {}, "#1f77b4", true};
        for (const auto& r : rows)
            if (r.error.empty()) s.x.push_back(r.g), s.y.push_back(r.lambda_L);
        write_line_plot(ctx.file("sweep.svg"), {"Lyapunov exponent against g", "g", "lambda_L", false}, {s});
    }
}

// quantize -------------------------------------------------------------------

void write_eigenvalues(Context& ctx, const EigenDecomposition& eig, const ErrorReport* errors) {
    CsvWriter csv(ctx.file("eigenvalues.csv"), {"n", "E_n", "error_ratio"});
    const std::size_t n = errors ? errors->levels.size() : eig.count();
    for (std::size_t i = 0; i < n; ++i)
        csv.row({double(i), eig.eigenvalues[Eigen::Index(i)],
                 errors ? errors->levels[i].ratio : std::numeric_limits<double>::quiet_NaN()});
    csv.close();
}

void quantize_spectrum(Context& ctx) {
    const int n = ctx.cfg.grids()[1];
    const auto s = ctx.solve(ctx.cfg.params, n, ctx.cfg.quantize.k_lowest);
    write_eigenvalues(ctx, s.eig, nullptr);
    write_json(ctx, "spectrum.json",
               {{"grid", n}, {"levels", s.eig.count()}, {"E0", s.eig.eigenvalues[0]}, {"cache_hit", s.cache_hit}});
    ctx.log << s.eig.count() << " levels, E0 " << s.eig.eigenvalues[0] << '\n';
}

// Linear fit over the upper half of the reliable window.
std::optional<LineFit> spectrum_fit(const EigenDecomposition& eig, std::size_t reliable, std::size_t* lo) {
    if (reliable < 8) return std::nullopt;
    *lo = reliable / 2;
    return fit_linear_spectrum(eig, *lo, reliable - 1);
}

void quantize_errors(Context& ctx) {
    const auto pair = ctx.solve_pair(ctx.cfg.params);
    const auto& rep = pair.errors;
    write_eigenvalues(ctx, pair.fine.eig, &rep);
    std::size_t lo = 0;
    const auto fit = spectrum_fit(pair.fine.eig, rep.reliable_count, &lo);
    const auto g = ctx.cfg.grids();
    json j = {{"grids", g},
              {"threshold", rep.threshold},
              {"reliable_count", rep.reliable_count},
              {"count_1e-3", rep.count_within(1e-3)},
              {"compared_levels", rep.levels.size()}};
    if (fit) {
        j["linear_fit"] = fit_json(*fit);
        j["linear_fit"]["levels"] = {lo, rep.reliable_count - 1};
    }
    write_json(ctx, "errors.json", j);
    ctx.log << "reliable count " << rep.reliable_count << " (ratio <= " << rep.threshold << "), "
            << rep.count_within(1e-3) << " at 1e-3\n";
    if (fit) ctx.log << "E_n ~ " << fit->slope << " n + " << fit->intercept << '\n';
    if (ctx.cfg.plot) {
        PlotSeries e{"E_n", {}, {}, "#1f77b4"}, r{"error ratio", {}, {}, "#d62728"};
        for (std::size_t i = 0; i < rep.levels.size(); ++i) {
            e.x.push_back(double(i));
            e.y.push_back(pair.fine.eig.eigenvalues[Eigen::Index(i)]);
            r.x.push_back(double(i));
            r.y.push_back(rep.levels[i].ratio);
        }
        write_line_plot(ctx.file("eigenvalues.svg"), {"Spectrum", "n", "E_n", false}, {e});
        write_line_plot(ctx.file("error_ratio.svg"), {"Two-grid error ratio", "n", "ratio", true}, {r});
    }
}

// stats ----------------------------------------------------------------------

void stats(Context& ctx, int default_r) {
    const int r = ctx.cfg.stats.r.value_or(default_r);
    const auto pair = ctx.solve_pair(ctx.cfg.params);
    const auto& eig = pair.fine.eig;
    const std::size_t reliable = pair.errors.reliable_count;
    const bool unit = ctx.cfg.stats.scaling == "unit_mean";
    const auto e = std::span<const double>(eig.eigenvalues.data(), eig.count());
    const auto dist = spacing_distribution(e, r, reliable, unit ? Normalization::unit_mean : Normalization::raw,
                                           ctx.cfg.stats.bins);
    const auto fit = compare_templates(spacings(e, r, reliable), unit ? Scaling::unit_mean : Scaling::paper_hand_fit);
    const auto poisson = unit ? poisson_template_unit : poisson_template_paper;

    const std::string tag = "r" + std::to_string(r);
    CsvWriter csv(ctx.file("spacing_" + tag + ".csv"), {"bin_lo", "bin_hi", "density", "goe_density", "poisson_density"});
    const auto& h = dist.histogram;
    for (std::size_t b = 0; b < h.density.size(); ++b) {
        const double mid = 0.5 * (h.edges[b] + h.edges[b + 1]);
        csv.row({h.edges[b], h.edges[b + 1], h.density[b], goe_template(mid), poisson(mid)});
    }
    csv.close();
    write_json(ctx, "spacing_" + tag + ".json",
               {{"r", r},
                {"ks_goe", fit.ks_goe},
                {"ks_poisson", fit.ks_poisson},
                {"verdict", to_string(fit.verdict)},
                {"n_spacings", fit.n_spacings},
                {"scaling", to_string(fit.scaling)},
                {"reliable_count", reliable}});
    ctx.log << "r=" << r << " KS GOE " << fit.ks_goe << " Poisson " << fit.ks_poisson << " -> "
            << to_string(fit.verdict) << '\n';
    if (ctx.cfg.plot) {
        PlotSeries g{"GOE", {}, {}, "#d62728"}, p{"Poisson", {}, {}, "#2ca02c"};
        const double hi = h.edges.back();
        for (int i = 0; i <= 200; ++i) {
            const double x = hi * i / 200.0;
            g.x.push_back(x), g.y.push_back(goe_template(x));
            p.x.push_back(x), p.y.push_back(poisson(x));
        }
        write_histogram_plot(ctx.file("spacing_" + tag + ".svg"),
                             {r == 1 ? "Nearest-neighbour spacings" : "Order-" + std::to_string(r) + " spacings",
                              unit ? "s / mean" : "s", "density", false},
                             h.edges, h.density, {g, p});
    }
}

// otoc -----------------------------------------------------------------------

std::vector<double> betas(const OtocBlock& o) {
    if (!o.betas.empty()) return o.betas;
    std::vector<double> b;
    for (int e : o.beta_exponents) b.push_back(2.0 / std::ldexp(1.0, e));
    return b;
}

std::string beta_tag(double beta) { return format_number(2.0 / beta) + "pi"; }

struct OtocSetup {
    OperatorMatrix w, v, v2;
    std::vector<double> energies;
    std::size_t M = 0;
    std::size_t reliable = 0;
};

OtocSetup otoc_setup(Context& ctx) {
    const auto pair = ctx.solve_pair(ctx.cfg.params);
    const auto& eig = pair.fine.eig;
    OtocSetup s;
    s.reliable = pair.errors.reliable_count;
    if (s.reliable < 2)
        throw TruncationError("only " + std::to_string(s.reliable) + " reliable levels on grids " +
                              std::to_string(ctx.cfg.grids()[0]) + "/" + std::to_string(ctx.cfg.grids()[1]));
    s.M = std::min(ctx.cfg.otoc.M, s.reliable);
    if (s.M < ctx.cfg.otoc.M)
        ctx.log << "M reduced to the reliable count " << s.M << '\n';
    s.w = operator_matrix(eig, OperatorKind::theta1, s.M, s.reliable);
    s.v = operator_matrix(eig, OperatorKind::p1, s.M, s.reliable);
    s.v2 = operator_matrix(eig, OperatorKind::p1sq, s.M, s.reliable);
    s.energies.assign(eig.eigenvalues.data(), eig.eigenvalues.data() + s.M);
    return s;
}

OtocOptions otoc_options(const Context& ctx) {
    OtocOptions o;
    o.form = ctx.cfg.otoc.form == "paper_literal" ? CommutatorForm::paper_literal : CommutatorForm::hermitian;
    o.hbar = ctx.cfg.params.hbar;
    o.threads = ctx.cfg.threads;
    return o;
}

void write_otoc_csv(Context& ctx, const std::string& name, const OtocSeries& s) {
    CsvWriter csv(ctx.file(name), {"t", "ReF", "ImF", "C"});
    for (std::size_t i = 0; i < s.times.size(); ++i) csv.row({s.times[i], s.F[i].real(), s.F[i].imag(), s.C[i]});
    csv.close();
}

void otoc_compute(Context& ctx) {
    const auto setup = otoc_setup(ctx);
    const auto times = linspace(ctx.cfg.otoc.t_max, ctx.cfg.otoc.samples);
    for (double beta : betas(ctx.cfg.otoc)) {
        const auto s = otoc_series(setup.w, setup.v, setup.v2, setup.energies, beta, times, otoc_options(ctx));
        const std::string tag = beta_tag(beta);
        write_otoc_csv(ctx, "otoc_" + tag + ".csv", s);
        ctx.log << "beta=" << beta << " C(0) " << s.C[0] << '\n';
        if (ctx.cfg.plot) {
            std::vector<double> re, absF;
            for (const auto& f : s.F) re.push_back(f.real()), absF.push_back(std::abs(f));
            write_line_plot(ctx.file("otoc_" + tag + ".svg"), {"OTOC, 2pi/beta = " + tag, "t", "", false},
                            {{"Re F", times, re, "#1f77b4"}, {"|F|", times, absF, "#9467bd"}, {"C", times, s.C, "#d62728"}});
        }
    }
}

void otoc_fit(Context& ctx) {
    const auto setup = otoc_setup(ctx);
    const auto& o = ctx.cfg.otoc;
    const auto times = short_time_grid(ctx.cfg.params, o.fit_window, o.fit_fraction);
    const FitTarget target = o.fit_target == "C" ? FitTarget::C : FitTarget::re_F;
    CsvWriter summary(ctx.file("otoc_fits.csv"), {"beta", "a", "b", "lambda_q", "saturation_ratio"});
    for (double beta : betas(o)) {
        const auto s = otoc_series(setup.w, setup.v, setup.v2, setup.energies, beta, times, otoc_options(ctx));
        const std::string tag = beta_tag(beta);
        write_otoc_csv(ctx, "otoc_short_" + tag + ".csv", s);
        const auto fit = fit_otoc_short_time(s, o.fit_window, target);
        const auto mss = mss_report(fit, ctx.cfg.params.hbar);
        write_json(ctx, "otoc_fit_" + tag + ".json",
                   {{"a", fit.a},
                    {"b", fit.b},
                    {"lambda_q", fit.lambda_q},
                    {"window", {fit.t_lo, fit.t_hi}},
                    {"samples", fit.window},
                    {"beta", beta},
                    {"M", setup.M},
                    {"saturation_ratio", fit.saturation_ratio},
                    {"mss_bound", fit.mss_bound},
                    {"rms", fit.rms},
                    {"target", o.fit_target},
                    {"summary", mss.summary}});
        summary.row({beta, fit.a, fit.b, fit.lambda_q, fit.saturation_ratio});
        ctx.log << "beta=" << beta << " lambda_q " << fit.lambda_q << "  " << mss.summary << '\n';
    }
    summary.close();
}

// cc -------------------------------------------------------------------------

void cc_compute(Context& ctx) {
    const auto& c = ctx.cfg.cc;
    const int n = c.grid.value_or(ctx.cfg.grids()[0]);
    const auto times = linspace(c.t_max, c.samples);
    ComplexityConfig cfg;
    cfg.epsilon = c.epsilon;
    cfg.ell_eff = c.ell_eff;
    cfg.k = c.k;
    cfg.M = c.M;
    cfg.centered = c.centered;
    cfg.angle_scaling = c.angle_scaling == "divided_by_k" ? AngleScaling::divided_by_k : AngleScaling::unscaled;
    cfg.threads = ctx.cfg.threads;
    std::vector<PlotSeries> curves;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    for (double g : c.g_list) {
        PendulumParams p = ctx.cfg.params;
        p.g = g;
        const auto h = ctx.solve(p, n, std::nullopt);
        const auto hp = ctx.solve(perturbed_hamiltonian(p, c.epsilon), n, std::nullopt);
        const auto s = complexity_series(h.eig, hp.eig, cfg, times);
        const std::string tag = "g" + format_number(g);
        CsvWriter csv(ctx.file("cc_" + tag + ".csv"), {"t", "C"});
        for (std::size_t i = 0; i < times.size(); ++i) csv.row({times[i], s.C[i]});
        csv.close();
        write_json(ctx, "cc_fit_" + tag + ".json",
                   {{"slope", s.linear_fit.slope},
                    {"intercept", s.linear_fit.intercept},
                    {"r2", s.linear_fit.r2},
                    {"window", {s.fit_t_lo, s.fit_t_hi}},
                    {"epsilon", s.epsilon},
                    {"k", s.k},
                    {"ell_eff", s.ell_eff},
                    {"g", g},
                    {"grid", n},
                    {"min_delta", s.min_delta},
                    {"max_norm_error", s.max_norm_error},
                    {"gaussianity_deficit", s.gaussianity_deficit}});
        ctx.log << "g=" << g << " slope " << s.linear_fit.slope << " r2 " << s.linear_fit.r2 << '\n';
        curves.push_back({"g=" + format_number(g), times, s.C, colors[curves.size() % 5]});
    }
    if (ctx.cfg.plot) write_line_plot(ctx.file("cc.svg"), {"Circuit complexity", "t", "C", false}, curves);
}

// ----------------------------------------------------------------------------

void error_line(std::ostream& err, const std::string& code, const std::string& message) {
    err << json{{"error", code}, {"message", message}}.dump() << '\n';
}

RunConfig resolve_config(const Flags& f, const std::string& group) {
    RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (f.plot) cfg.plot = true;
    if (f.threads) cfg.threads = *f.threads;
    if (f.profile) cfg.profile = *f.profile;
    if (!f.g_list.empty()) (group == "cc" ? cfg.cc.g_list : cfg.classical.g_list) = f.g_list;
    if (f.r) cfg.stats.r = f.r;
    if (!f.beta_exp.empty()) {
        cfg.otoc.beta_exponents = parse_exponents(f.beta_exp);
        cfg.otoc.betas.clear();
    }
    if (f.M) cfg.otoc.M = *f.M;
    if (!f.grids.empty()) {
        if (f.grids.size() != 2) throw UsageError("--grids expects two sizes");
        cfg.quantize.grids = std::array<int, 2>{f.grids[0], f.grids[1]};
    }
    cfg.validate();
    return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum and classical chaos of the double rod pendulum", "chaology"};
    app.require_subcommand(1);
    Flags flags;
    std::function<void(Context&)> action;
    std::vector<std::string> command;

    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help,
                    std::function<void(Context&)> body) {
        auto* sub = parent->add_subcommand(name, help);
        sub->add_option("--config", flags.config, "JSON config file or a previous manifest")->check(CLI::ExistingFile);
        sub->add_option("--out", flags.out, "output directory")->required();
        sub->add_flag("--plot", flags.plot, "also render SVG plots");
        sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--profile", flags.profile, "grid profile")->check(CLI::IsMember({"desk", "paper"}));
        sub->callback([&, sub, parent, body] {
            action = body;
            command = {parent->get_name(), sub->get_name()};
        });
        return sub;
    };

    auto* classical = app.add_subcommand("classical", "classical dynamics")->require_subcommand(1);
    leaf(classical, "simulate", "integrate one trajectory", classical_simulate);
    leaf(classical, "lyapunov", "divergence of the reference pair and its Lyapunov fit", classical_lyapunov);
    leaf(classical, "sweep-g", "Lyapunov fit per field strength", classical_sweep)
        ->add_option("--g", flags.g_list, "comma-separated field strengths")
        ->delimiter(',');

    auto* quantize = app.add_subcommand("quantize", "spectral quantization")->require_subcommand(1);
    leaf(quantize, "spectrum", "eigenvalues on the finer grid", quantize_spectrum)
        ->add_option("--grids", flags.grids, "two grid sizes")->delimiter(',');
    leaf(quantize, "errors", "two-grid error estimate", quantize_errors)
        ->add_option("--grids", flags.grids, "two grid sizes")->delimiter(',');

    auto* st = app.add_subcommand("stats", "level-spacing statistics")->require_subcommand(1);
    leaf(st, "nnsd", "nearest-neighbour spacings", [](Context& c) { stats(c, 1); })
        ->add_option("--r", flags.r, "spacing order")->check(CLI::PositiveNumber);
    leaf(st, "nnnsd", "next-nearest-neighbour spacings", [](Context& c) { stats(c, 2); })
        ->add_option("--r", flags.r, "spacing order")->check(CLI::PositiveNumber);

    auto* ot = app.add_subcommand("otoc", "out-of-time-order correlators")->require_subcommand(1);
    for (auto* sub : {leaf(ot, "compute", "F(t) and C(t) per inverse temperature", otoc_compute),
                      leaf(ot, "fit", "short-time exponential fit per inverse temperature", otoc_fit)}) {
        sub->add_option("--beta-exp", flags.beta_exp, "exponents e of 2pi/beta = 2^e pi, as LO..HI or a list");
        sub->add_option("--M", flags.M, "retained eigenstates")->check(CLI::PositiveNumber);
    }

    auto* cc = app.add_subcommand("cc", "circuit complexity")->require_subcommand(1);
    leaf(cc, "compute", "complexity series per field strength", cc_compute)
        ->add_option("--g", flags.g_list, "comma-separated field strengths")
        ->delimiter(',');

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        error_line(err, "UsageError", e.what());
        const auto* failing = &app;
        for (auto* s = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front(); s;
             s = s->get_subcommands().empty() ? nullptr : s->get_subcommands().front())
            failing = s;
        err << failing->help();
        return 2;
    }

    RunConfig cfg;
    try {
        cfg = resolve_config(flags, command.front());
    } catch (const std::exception& e) {
        const auto* ce = dynamic_cast<const Error*>(&e);
        error_line(err, ce ? ce->code() : "UsageError", e.what());
        return 2;
    }

    try {
        Context ctx{cfg, flags.out, std::nullopt, command, json::array(), {}, out};
        fs::create_directories(ctx.out);
        if (const char* env = std::getenv("CHAOLOGY_CACHE_DIR"); env && *env)
            ctx.cache = fs::path(env);
        else
            ctx.cache = cfg.cache_dir.empty() ? ctx.out / "cache" : fs::path(cfg.cache_dir);
        action(ctx);
        ctx.write_manifest();
    } catch (const Error& e) {
        error_line(err, e.code(), e.what());
        return 1;
    } catch (const std::exception& e) {
        error_line(err, "InternalError", e.what());
        return 1;
    }
    return 0;
}

}  // namespace chaology::cli
