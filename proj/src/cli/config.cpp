#include <fstream>
#include <set>

#include "chaology/cli.hpp"
#include "chaology/error.hpp"

namespace chaology::cli {

namespace {

using nlohmann::json;

// Reads the fields of one JSON object and rejects whatever was not asked for.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw InvalidArgument(where_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& into) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            into = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw InvalidArgument(where_ + "." + key + ": " + e.what());
        }
    }

    template <class T>
    void get(const char* key, std::optional<T>& into) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return;
        T v{};
        get(key, v);
        into = v;
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw InvalidArgument("unknown config key " + where_ + "." + k);
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

bool one_of(const std::string& v, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (v == a) return true;
    return false;
}

}  // namespace

std::array<int, 2> RunConfig::grids() const {
    if (quantize.grids) return *quantize.grids;
    return profile == "paper" ? std::array<int, 2>{141, 173} : std::array<int, 2>{48, 64};
}

void RunConfig::validate() const {
    params.validate();
    if (!one_of(profile, {"desk", "paper"})) throw InvalidArgument("profile must be desk or paper");
    if (threads < 1) throw InvalidArgument("threads must be at least 1");

    const auto& c = classical;
    if (!(c.t_max > 0) || !(c.dt > 0) || !(c.tol > 0)) throw InvalidArgument("classical: t_max, dt, tol must be positive");
    if (c.g_list.empty()) throw InvalidArgument("classical.g_list is empty");
    if (!one_of(c.fit_mode, {"until_order_one", "full_window"}))
        throw InvalidArgument("classical.fit_mode must be until_order_one or full_window");

    const auto g = grids();
    if (g[0] < 3 || g[1] < 3) throw InvalidArgument("quantize.grids must be at least 3");
    if (g[0] == g[1]) throw InvalidArgument("quantize.grids must differ for error estimation");
    if (!one_of(quantize.stencil, {"fourier", "paper_literal"}))
        throw InvalidArgument("quantize.stencil must be fourier or paper_literal");
    if (!(quantize.threshold > 0)) throw InvalidArgument("quantize.threshold must be positive");
    if (quantize.k_lowest && *quantize.k_lowest == 0) throw InvalidArgument("quantize.k_lowest must be positive");

    if (stats.r && *stats.r < 1) throw InvalidArgument("stats.r must be at least 1");
    if (stats.bins < 1) throw InvalidArgument("stats.bins must be positive");
    if (!one_of(stats.scaling, {"unit_mean", "paper_hand_fit"}))
        throw InvalidArgument("stats.scaling must be unit_mean or paper_hand_fit");

    const auto& o = otoc;
    if (o.betas.empty() && o.beta_exponents.empty()) throw InvalidArgument("otoc: no inverse temperatures");
    for (double b : o.betas)
        if (!(b > 0)) throw InvalidArgument("otoc.betas must be positive");
    if (o.M < 1) throw InvalidArgument("otoc.M must be positive");
    if (!(o.t_max > 0) || o.samples < 2) throw InvalidArgument("otoc: need t_max > 0 and at least 2 samples");
    if (o.fit_window < 4) throw InvalidArgument("otoc.fit_window must be at least 4");
    if (!(o.fit_fraction > 0)) throw InvalidArgument("otoc.fit_fraction must be positive");
    if (!one_of(o.form, {"hermitian", "paper_literal"})) throw InvalidArgument("otoc.form must be hermitian or paper_literal");
    if (!one_of(o.fit_target, {"re_F", "C"})) throw InvalidArgument("otoc.fit_target must be re_F or C");

    if (cc.g_list.empty()) throw InvalidArgument("cc.g_list is empty");
    for (double gv : cc.g_list)
        if (!(gv > 0)) throw InvalidArgument("cc.g_list entries must be positive");
    if (!(std::abs(cc.epsilon) < 1.0)) throw InvalidArgument("cc.epsilon must satisfy |epsilon| < 1");
    if (!(cc.t_max > 0) || cc.samples < 4) throw InvalidArgument("cc: need t_max > 0 and at least 4 samples");
    if (cc.grid && *cc.grid < 3) throw InvalidArgument("cc.grid must be at least 3");
    if (!one_of(cc.angle_scaling, {"unscaled", "divided_by_k"}))
        throw InvalidArgument("cc.angle_scaling must be unscaled or divided_by_k");
}

RunConfig config_from_json(const json& input) {
    const json* root = &input;
    if (input.is_object() && input.contains("manifest_version")) {
        if (!input.contains("config")) throw InvalidArgument("manifest has no config object");
        root = &input.at("config");
    }
    RunConfig c;
    Reader r(*root, "config");
    if (const json* p = r.child("params")) {
        Reader q(*p, "params");
        q.get("m1", c.params.m1);
        q.get("m2", c.params.m2);
        q.get("l1", c.params.l1);
        q.get("l2", c.params.l2);
        q.get("g", c.params.g);
        q.get("hbar", c.params.hbar);
        q.finish();
    }
    r.get("profile", c.profile);
    r.get("cache_dir", c.cache_dir);
    r.get("plot", c.plot);
    r.get("threads", c.threads);
    if (const json* p = r.child("classical")) {
        Reader q(*p, "classical");
        q.get("t_max", c.classical.t_max);
        q.get("dt", c.classical.dt);
        q.get("tol", c.classical.tol);
        q.get("initial", c.classical.initial);
        q.get("perturbation", c.classical.perturbation);
        q.get("k", c.classical.k);
        q.get("g_list", c.classical.g_list);
        q.get("fit_mode", c.classical.fit_mode);
        q.get("paper_literal_distance", c.classical.paper_literal_distance);
        q.finish();
    }
    if (const json* p = r.child("quantize")) {
        Reader q(*p, "quantize");
        q.get("grids", c.quantize.grids);
        q.get("stencil", c.quantize.stencil);
        q.get("threshold", c.quantize.threshold);
        q.get("k_lowest", c.quantize.k_lowest);
        q.get("memory_budget_mb", c.quantize.memory_budget_mb);
        q.finish();
    }
    if (const json* p = r.child("stats")) {
        Reader q(*p, "stats");
        q.get("r", c.stats.r);
        q.get("bins", c.stats.bins);
        q.get("scaling", c.stats.scaling);
        q.finish();
    }
    if (const json* p = r.child("otoc")) {
        Reader q(*p, "otoc");
        q.get("beta_exponents", c.otoc.beta_exponents);
        q.get("betas", c.otoc.betas);
        q.get("M", c.otoc.M);
        q.get("t_max", c.otoc.t_max);
        q.get("samples", c.otoc.samples);
        q.get("fit_window", c.otoc.fit_window);
        q.get("fit_fraction", c.otoc.fit_fraction);
        q.get("form", c.otoc.form);
        q.get("fit_target", c.otoc.fit_target);
        q.finish();
    }
    if (const json* p = r.child("cc")) {
        Reader q(*p, "cc");
        q.get("g_list", c.cc.g_list);
        q.get("epsilon", c.cc.epsilon);
        q.get("t_max", c.cc.t_max);
        q.get("samples", c.cc.samples);
        q.get("grid", c.cc.grid);
        q.get("ell_eff", c.cc.ell_eff);
        q.get("k", c.cc.k);
        q.get("M", c.cc.M);
        q.get("centered", c.cc.centered);
        q.get("angle_scaling", c.cc.angle_scaling);
        q.finish();
    }
    r.finish();
    return c;
}

json config_to_json(const RunConfig& c) {
    const auto& p = c.params;
    return {
        {"params", {{"m1", p.m1}, {"m2", p.m2}, {"l1", p.l1}, {"l2", p.l2}, {"g", p.g}, {"hbar", p.hbar}}},
        {"profile", c.profile},
        {"cache_dir", c.cache_dir},
        {"plot", c.plot},
        {"threads", c.threads},
        {"classical",
         {{"t_max", c.classical.t_max},
          {"dt", c.classical.dt},
          {"tol", c.classical.tol},
          {"initial", opt(c.classical.initial)},
          {"perturbation", c.classical.perturbation},
          {"k", opt(c.classical.k)},
          {"g_list", c.classical.g_list},
          {"fit_mode", c.classical.fit_mode},
          {"paper_literal_distance", c.classical.paper_literal_distance}}},
        {"quantize",
         {{"grids", c.grids()},
          {"stencil", c.quantize.stencil},
          {"threshold", c.quantize.threshold},
          {"k_lowest", opt(c.quantize.k_lowest)},
          {"memory_budget_mb", c.quantize.memory_budget_mb}}},
        {"stats",
         {{"r", opt(c.stats.r)}, {"bins", c.stats.bins}, {"scaling", c.stats.scaling}}},
        {"otoc",
         {{"beta_exponents", c.otoc.beta_exponents},
          {"betas", c.otoc.betas},
          {"M", c.otoc.M},
          {"t_max", c.otoc.t_max},
          {"samples", c.otoc.samples},
          {"fit_window", c.otoc.fit_window},
          {"fit_fraction", c.otoc.fit_fraction},
          {"form", c.otoc.form},
          {"fit_target", c.otoc.fit_target}}},
        {"cc",
         {{"g_list", c.cc.g_list},
          {"epsilon", c.cc.epsilon},
          {"t_max", c.cc.t_max},
          {"samples", c.cc.samples},
          {"grid", opt(c.cc.grid)},
          {"ell_eff", opt(c.cc.ell_eff)},
          {"k", opt(c.cc.k)},
          {"M", opt(c.cc.M)},
          {"centered", c.cc.centered},
          {"angle_scaling", c.cc.angle_scaling}}},
    };
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

}  // namespace chaology::cli
