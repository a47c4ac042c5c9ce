#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spde/model.hpp"

namespace spde {

struct GridRule {
    enum class Kind { NSteps, Dt, Auto };
    Kind kind = Kind::Auto;
    int n_steps = 0;
    double dt = 0.0;
    double auto_c = 0.2;     // dt = min(dt_cap, auto_c / max |lambda_bar|)
    double dt_cap = 0.05;
};

struct ExperimentConfig {
    ModelDescriptor model;
    std::string axis;             // "T", "eps" or "nu"
    std::vector<double> values;   // positive, sorted ascending
    int replicates = 2;
    double theta_true = 0.0;
    bool theta_uniform = false;   // theta_true = "uniform-in-range"
    GridRule grid;
    std::uint64_t master_seed = 1;
    std::string csv_path;
    std::string plot_path;
};

ExperimentConfig experiment_from_json(const std::string& text);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double r2 = 0.0;
    std::vector<std::pair<double, double>> points;  // (log x, log RMSE)
};

// Ordinary least squares on the given (x, y) pairs; stderr_slope is the +inf
// sentinel when there are fewer than 3 points.
SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& points);

struct RunRow {
    int run_id = 0;
    std::uint64_t seed = 0;
    double axis_value = 0.0;
    double theta_true = 0.0;
    double theta_hat = 0.0;
    double Z = 0.0;
    double N = 0.0;
    bool degenerate = false;
    double I_n = 0.0;
    double v_n_lower = 0.0;
};

struct ExperimentResult {
    std::vector<RunRow> rows;
    SlopeFit fit;
    std::vector<double> rmse;               // per sweep value
    std::vector<int> degenerate_counts;     // per sweep value
    std::vector<double> under_resolved;     // fraction of modes with w_k < 3
    bool degenerate_abort = false;
    int abort_value_index = -1;
};

// Monte Carlo sweep; bit-identical output for any worker count (per-replicate
// RNG streams are derived from the master seed, reduction order is fixed).
// workers <= 0 picks WORKERS from the environment, else hardware concurrency.
ExperimentResult run_experiment(const ExperimentConfig& config, int workers = 0);

// Writes the CSV (fixed header), a JSON metrics sidecar at <csv>.meta.json and
// the optional SVG log-log plot.
void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config);

int default_workers();

}  // namespace spde
