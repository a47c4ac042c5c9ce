#include "spde/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "spde/estimate.hpp"
#include "spde/information.hpp"
#include "spde/rng.hpp"
#include "spde/simulate.hpp"

namespace spde {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ExperimentConfig experiment_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("experiment JSON parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.model = [&] {
            // Reuse the model JSON schema for the embedded descriptor.
            SpectralModel m = model_from_json(j.at("model").dump());
            return m.descriptor;
        }();
        const auto& sweep = j.at("sweep");
        cfg.axis = sweep.at("axis").get<std::string>();
        cfg.values = sweep.at("values").get<std::vector<double>>();
        cfg.replicates = j.at("replicates").get<int>();
        if (j.at("theta_true").is_string()) {
            if (j.at("theta_true").get<std::string>() != "uniform-in-range")
                throw std::invalid_argument("theta_true must be a number or \"uniform-in-range\"");
            cfg.theta_uniform = true;
        } else {
            cfg.theta_true = j.at("theta_true").get<double>();
        }
        if (j.contains("grid_rule")) {
            const auto& g = j["grid_rule"];
            if (g.contains("n_steps")) {
                cfg.grid.kind = GridRule::Kind::NSteps;
                cfg.grid.n_steps = g["n_steps"].get<int>();
            } else if (g.contains("dt")) {
                cfg.grid.kind = GridRule::Kind::Dt;
                cfg.grid.dt = g["dt"].get<double>();
            } else {
                cfg.grid.kind = GridRule::Kind::Auto;
                cfg.grid.auto_c = g.value("c", 0.2);
                cfg.grid.dt_cap = g.value("dt_cap", 0.05);
            }
        }
        cfg.master_seed = j.value("master_seed", std::uint64_t{1});
        if (j.contains("outputs")) {
            cfg.csv_path = j["outputs"].value("csv", "");
            cfg.plot_path = j["outputs"].value("plot", "");
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("experiment JSON field error: ") + e.what());
    }
    if (cfg.axis != "T" && cfg.axis != "eps" && cfg.axis != "nu")
        throw std::invalid_argument("sweep axis must be T, eps or nu");
    if (cfg.values.empty() || !std::is_sorted(cfg.values.begin(), cfg.values.end()))
        throw std::invalid_argument("sweep values must be sorted ascending");
    for (double v : cfg.values)
        if (v <= 0.0) throw std::invalid_argument("sweep values must be positive");
    if (cfg.replicates < 2)
        throw std::invalid_argument("replicates must be >= 2");
    return cfg;
}

SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& points) {
    SlopeFit fit;
    fit.points = points;
    const std::size_t n = points.size();
    if (n < 2) {
        fit.slope = std::nan("");
        fit.stderr_slope = kInf;
        return fit;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double nn = static_cast<double>(n);
    const double denom = nn * sxx - sx * sx;
    fit.slope = (nn * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / nn;
    double ss_res = 0.0;
    double ss_tot = syy - sy * sy / nn;
    for (const auto& [x, y] : points) {
        const double e = y - (fit.intercept + fit.slope * x);
        ss_res += e * e;
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (n >= 3) {
        const double s2 = ss_res / (nn - 2.0);
        fit.stderr_slope = std::sqrt(s2 * nn / denom);
    } else {
        fit.stderr_slope = kInf;
    }
    return fit;
}

int default_workers() {
    if (const char* env = std::getenv("WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace {

ModelDescriptor apply_axis(ModelDescriptor d, const std::string& axis, double value) {
    if (axis == "T") {
        d.T = value;
    } else if (axis == "eps") {
        d.eps = value;
    } else {
        d.nu = value;
    }
    return d;
}

TimeGrid make_grid(const GridRule& rule, const SpectralModel& model) {
    TimeGrid grid;
    grid.T = model.T;
    switch (rule.kind) {
        case GridRule::Kind::NSteps:
            if (rule.n_steps < 2) throw std::invalid_argument("n_steps must be >= 2");
            grid.n_steps = rule.n_steps;
            return grid;
        case GridRule::Kind::Dt: {
            if (rule.dt <= 0.0) throw std::invalid_argument("dt must be > 0");
            grid.n_steps = std::max(2, static_cast<int>(std::lround(model.T / rule.dt)));
            return grid;
        }
        case GridRule::Kind::Auto: {
            double max_abs = 0.0;
            for (const auto& ml : assemble_lambda(model, model.theta_hi))
                max_abs = std::max(max_abs, std::abs(ml.lambda));
            double dt = rule.dt_cap;
            if (max_abs > 0.0) dt = std::min(dt, rule.auto_c / max_abs);
            grid.n_steps = std::max(2, static_cast<int>(std::ceil(model.T / dt)));
            return grid;
        }
    }
    throw std::logic_error("unreachable");
}

double under_resolved_fraction(const SpectralModel& model, double dt) {
    if (model.modes.empty()) return 0.0;
    int bad = 0;
    for (const auto& ml : assemble_lambda(model, model.theta_hi)) {
        const double a = std::abs(ml.lambda);
        if (a > 0.0 && 1.0 / (a * dt) < 3.0) ++bad;
    }
    return static_cast<double>(bad) / static_cast<double>(model.modes.size());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, int workers) {
    if (workers <= 0) workers = default_workers();
    const int n_values = static_cast<int>(config.values.size());
    const int reps = config.replicates;

    // Per sweep value: build the model once, share read-only with workers.
    std::vector<SpectralModel> models(n_values);
    std::vector<TimeGrid> grids(n_values);
    ExperimentResult result;
    result.under_resolved.resize(n_values);
    for (int vi = 0; vi < n_values; ++vi) {
        models[vi] = model_from_descriptor(
            apply_axis(config.model, config.axis, config.values[vi]));
        grids[vi] = make_grid(config.grid, models[vi]);
        result.under_resolved[vi] = under_resolved_fraction(models[vi], grids[vi].dt());
    }

    const int n_jobs = n_values * reps;
    result.rows.assign(n_jobs, RunRow{});
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error_msg;
    std::mutex error_mutex;

    auto work = [&]() {
        for (;;) {
            const int job = next.fetch_add(1);
            if (job >= n_jobs || failed.load()) return;
            const int vi = job / reps;
            const int rep = job % reps;
            const std::uint64_t global_rep = static_cast<std::uint64_t>(job);
            try {
                const SpectralModel& model = models[vi];
                double theta = config.theta_true;
                if (config.theta_uniform) {
                    rng::Xoshiro256 gen(
                        rng::stream_key(config.master_seed ^ 0x7A3E17B5D90FC2ULL,
                                        global_rep, 0));
                    theta = model.theta_lo +
                            (model.theta_hi - model.theta_lo) * gen.uniform();
                }
                const ObservationRecord obs = simulate_observations(
                    model, theta, grids[vi], config.master_seed, false, global_rep);
                const EstimatorResult est = estimate(model, obs);
                RunRow row;
                row.run_id = job;
                row.seed = rng::stream_key(config.master_seed, global_rep, 0);
                row.axis_value = config.values[vi];
                row.theta_true = theta;
                row.theta_hat = est.theta_hat;
                row.Z = est.Z;
                row.N = est.N;
                row.degenerate = est.degenerate;
                row.I_n = info_In(model, theta);
                row.v_n_lower = lower_bound_rate(model);
                result.rows[job] = row;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                failed.store(true);
                if (error_msg.empty()) error_msg = e.what();
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw std::runtime_error("experiment worker failed: " + error_msg);

    result.rmse.assign(n_values, 0.0);
    result.degenerate_counts.assign(n_values, 0);
    std::vector<std::pair<double, double>> points;
    for (int vi = 0; vi < n_values; ++vi) {
        double sq = 0.0;
        int good = 0;
        for (int rep = 0; rep < reps; ++rep) {
            const RunRow& row = result.rows[vi * reps + rep];
            if (row.degenerate) {
                ++result.degenerate_counts[vi];
                continue;
            }
            const double e = row.theta_hat - row.theta_true;
            sq += e * e;
            ++good;
        }
        result.rmse[vi] = good > 0 ? std::sqrt(sq / good) : std::nan("");
        if (result.degenerate_counts[vi] * 10 > reps) {
            result.degenerate_abort = true;
            if (result.abort_value_index < 0) result.abort_value_index = vi;
        }
        if (good > 0 && result.rmse[vi] > 0.0)
            points.emplace_back(std::log(config.values[vi]), std::log(result.rmse[vi]));
    }
    result.fit = fit_loglog(points);
    return result;
}

namespace {

void write_svg_plot(const ExperimentResult& result, const ExperimentConfig& config) {
    const auto& pts = result.fit.points;
    if (pts.size() < 2) return;
    double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
    for (const auto& [x, y] : pts) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    const double xpad = 0.05 * std::max(1e-9, xmax - xmin);
    const double ypad = 0.05 * std::max(1e-9, ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;
    const double W = 640, H = 480, M = 60;
    auto px = [&](double x) { return M + (x - xmin) / (xmax - xmin) * (W - 2 * M); };
    auto py = [&](double y) { return H - M - (y - ymin) / (ymax - ymin) * (H - 2 * M); };

    std::ofstream out(config.plot_path);
    if (!out) throw std::runtime_error("cannot write plot to " + config.plot_path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    out << "<line x1='" << M << "' y1='" << H - M << "' x2='" << W - M << "' y2='"
        << H - M << "' stroke='black'/>\n";
    out << "<line x1='" << M << "' y1='" << M << "' x2='" << M << "' y2='" << H - M
        << "' stroke='black'/>\n";
    // fit line across the x range
    const double yl = result.fit.intercept + result.fit.slope * xmin;
    const double yr = result.fit.intercept + result.fit.slope * xmax;
    out << "<line x1='" << px(xmin) << "' y1='" << py(yl) << "' x2='" << px(xmax)
        << "' y2='" << py(yr) << "' stroke='steelblue' stroke-width='1.5'/>\n";
    for (const auto& [x, y] : pts)
        out << "<circle cx='" << px(x) << "' cy='" << py(y)
            << "' r='4' fill='crimson'/>\n";
    out << "<text x='" << W / 2 << "' y='" << H - 18
        << "' text-anchor='middle' font-size='13'>log " << config.axis
        << " (slope " << result.fit.slope << ")</text>\n";
    out << "<text x='18' y='" << H / 2
        << "' font-size='13' transform='rotate(-90 18 " << H / 2
        << ")' text-anchor='middle'>log RMSE</text>\n";
    out << "</svg>\n";
}

}  // namespace

void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config) {
    if (result.rows.empty()) throw std::runtime_error("no rows to emit");
    if (config.csv_path.empty()) throw std::runtime_error("csv output path missing");
    std::ofstream out(config.csv_path);
    if (!out) throw std::runtime_error("cannot write CSV to " + config.csv_path);
    out.precision(12);
    out << "run_id,seed,axis,axis_value,theta_true,theta_hat,Z,N,degenerate,I_n,v_n_lower\n";
    for (const RunRow& row : result.rows) {
        out << row.run_id << ',' << row.seed << ',' << config.axis << ','
            << row.axis_value << ',' << row.theta_true << ',' << row.theta_hat << ','
            << row.Z << ',' << row.N << ',' << (row.degenerate ? 1 : 0) << ','
            << row.I_n << ',' << row.v_n_lower << '\n';
    }
    if (!out) throw std::runtime_error("CSV write failed");
    out.close();

    nlohmann::json meta;
    meta["axis"] = config.axis;
    meta["values"] = config.values;
    meta["replicates"] = config.replicates;
    meta["rmse"] = result.rmse;
    meta["degenerate_counts"] = result.degenerate_counts;
    meta["under_resolved_fraction"] = result.under_resolved;
    meta["degenerate_abort"] = result.degenerate_abort;
    meta["slope"] = result.fit.slope;
    meta["intercept"] = result.fit.intercept;
    meta["stderr_slope"] = std::isfinite(result.fit.stderr_slope)
                               ? result.fit.stderr_slope
                               : -1.0;
    meta["r2"] = result.fit.r2;
    std::ofstream ms(config.csv_path + ".meta.json");
    if (!ms) throw std::runtime_error("cannot write metrics sidecar");
    ms << meta.dump(2) << '\n';

    if (!config.plot_path.empty()) write_svg_plot(result, config);
}

}  // namespace spde
