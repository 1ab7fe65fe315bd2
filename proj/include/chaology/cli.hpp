#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaology/model.hpp"

namespace chaology::cli {

inline constexpr const char* tool_version = "0.1.0";

struct ClassicalBlock {
    double t_max = 25.0;
    double dt = 0.01;
    double tol = 1e-8;
    std::optional<std::array<double, 4>> initial;  ///< (θ1, θ2, p1, p2); reference pair when absent
    double perturbation = 1e-6 * std::numbers::pi;  ///< added to θ2 of the second trajectory
    std::optional<double> k;
    std::vector<double> g_list{1.0, 10.0, 100.0};
    std::string fit_mode = "until_order_one";
    bool paper_literal_distance = false;
};

struct QuantizeBlock {
    std::optional<std::array<int, 2>> grids;  ///< profile default when absent
    std::string stencil = "fourier";
    double threshold = 1e-4;
    std::optional<std::size_t> k_lowest;
    std::size_t memory_budget_mb = 2048;
};

struct StatsBlock {
    std::optional<int> r;  ///< 1 for nnsd, 2 for nnnsd when absent
    int bins = 50;
    std::string scaling = "unit_mean";
};

struct OtocBlock {
    std::vector<int> beta_exponents{4, 5, 6, 7, 8};  ///< 2π/β = 2^e·π
    std::vector<double> betas;                       ///< explicit list; replaces the exponents
    std::size_t M = 500;
    double t_max = 200.0;
    std::size_t samples = 401;
    std::size_t fit_window = 10;
    double fit_fraction = 0.005;
    std::string form = "hermitian";
    std::string fit_target = "re_F";
};

struct CcBlock {
    std::vector<double> g_list{10.0, 40.0, 90.0};
    double epsilon = 1e-6;
    double t_max = 50.0;
    std::size_t samples = 501;
    std::optional<int> grid;  ///< first profile grid when absent
    std::optional<double> ell_eff;
    std::optional<double> k;
    std::optional<std::size_t> M;
    bool centered = false;
    std::string angle_scaling = "unscaled";
};

struct RunConfig {
    PendulumParams params;
    std::string profile = "desk";
    std::string cache_dir;  ///< <out>/cache when empty; CHAOLOGY_CACHE_DIR wins
    bool plot = false;
    unsigned threads = 1;
    ClassicalBlock classical;
    QuantizeBlock quantize;
    StatsBlock stats;
    OtocBlock otoc;
    CcBlock cc;

    /// The two error-estimation grids: explicit ones, else 48/64 (desk) or 141/173 (paper).
    std::array<int, 2> grids() const;

    /// Throws InvalidArgument on the first inconsistent field.
    void validate() const;
};

/// Strict reader: every key must be known. A manifest written by a previous
/// run is accepted too, in which case its "config" object is used.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::filesystem::path& path);

/// Runs the command line `args` (without the program name). Usage errors
/// return 2, computation errors 1; both print a JSON error object on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chaology::cli
