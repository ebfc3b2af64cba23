#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "field_io.hpp"
#include "gaussian_lab.hpp"
#include "gpam_solver.hpp"

namespace homlab {

struct OutputFormats {
    bool csv = true;
    bool json = true;
    bool svg = false;
    std::string list() const;
};

struct ExperimentConfig {
    std::string coefficient = "laminate";  // identity, laminate, trig
    double base = 2.0;
    double amplitude = 1.0;
    double skew = 0.0;
    std::string g = "sin";
    double g_const = 1.0;
    int n = 64;
    int M = 64;
    double T = 0.1;
    std::vector<int> N_list{4, 8, 16};
    std::vector<double> delta_list{0.125};
    std::uint64_t seed_first = 1;
    int seed_count = 10;
    double kappa = 0.05;
    double alpha = 0.8;
    double sigma = 0.1;
    std::string out = "out";
    OutputFormats formats;
    double guard = 1e3;
    bool noise = true;            // false: eta = 0 and C = 0
    std::string backend = "fd";   // fd, spectral
    std::string mollifier = "sharp";
    bool renorm_average = false;
    std::vector<double> green_times{0.05};
    double green_dt = 1e-3;
    double tol = 1e-10;
    double pair_budget = 1e7;
    int threads = 0;

    CoefficientSpec coefficient_spec() const;
    Nonlinearity nonlinearity() const;
    Backend backend_kind() const;
    Mollifier mollifier_kind() const;
    TimeGrid time_grid() const { return TimeGrid(T, M); }
    std::vector<std::uint64_t> seeds() const;
    /// Keys and values in a fixed order, as written to the manifest.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Accumulates settings and every problem found on the way, so that a single
/// report covers the whole configuration.
class ConfigBuilder {
public:
    void set(const std::string& key, const std::string& value);
    /// key = value lines; '#' starts a comment.
    void load_text(const std::string& text, const std::string& origin = "config");
    void load_file(const std::string& path);
    /// Parse errors plus constraint violations.
    std::vector<std::string> problems() const;
    /// Throws a Config error listing every problem.
    ExperimentConfig build() const;
    const ExperimentConfig& current() const { return cfg_; }

private:
    ExperimentConfig cfg_;
    std::vector<std::string> errors_;
};

std::vector<std::string> validate(const ExperimentConfig& cfg);

struct RateFit {
    std::string name;
    std::vector<double> x, y;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double std_error = 0.0;
    bool degenerate = false;
    std::string reason;
};

/// OLS of log y against log x. Fewer than three points, non-positive
/// ordinates or max y below 10 * floor give a degenerate fit.
RateFit fit_rate(const std::string& name, const std::vector<double>& x, const std::vector<double>& y, double floor = 0.0);

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

struct Plot {
    std::string name;
    std::string title;
    std::string xlabel, ylabel;
    std::vector<PlotSeries> series;
};

struct RunResult {
    std::string command;
    std::vector<Table> tables;
    std::vector<RateFit> fits;
    std::vector<Plot> plots;
    std::vector<std::pair<std::string, nlohmann::json>> json_files;  // name without extension
    std::vector<std::pair<std::string, FieldFile>> fields;            // binary field outputs
    std::vector<std::uint64_t> seeds;
    std::vector<std::pair<std::string, std::string>> noise_hashes;    // seed -> hash
    nlohmann::json summary = nlohmann::json::object();
};

std::string format_number(double x);
std::string version_string();

RunResult run_corrector(const ExperimentConfig& cfg);
RunResult run_linear(const ExperimentConfig& cfg);
RunResult run_renorm(const ExperimentConfig& cfg);
RunResult run_gpam(const ExperimentConfig& cfg);
RunResult run_commutation(const ExperimentConfig& cfg);
RunResult run_flux(const ExperimentConfig& cfg);
RunResult run_stochastic(const ExperimentConfig& cfg);
RunResult run_green(const ExperimentConfig& cfg);

/// Dispatch by subcommand name.
RunResult run_command(const std::string& command, const ExperimentConfig& cfg);
bool known_command(const std::string& command);

/// Writes tables, JSON files, plots, fields and manifest.json into cfg.out.
/// Returns the written paths in order.
std::vector<std::string> emit(const RunResult& result, const ExperimentConfig& cfg);

std::string render_csv(const Table& t);
std::string render_svg(const Plot& p);
nlohmann::json manifest(const RunResult& result, const ExperimentConfig& cfg);
nlohmann::json fit_json(const RateFit& f);

/// Flux identity quantity a grad I(div a)(T) - (abar - a0) in C^{beta}, max over entries.
double flux_identity_norm(const EllipticOperator& L, const CorrectorPack& pack, const TimeGrid& tg, double beta);

}  // namespace homlab
