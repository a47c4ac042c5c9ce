#include "spde_c.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <string>

#include <json.hpp>

#include "spde/estimate.hpp"
#include "spde/harness.hpp"
#include "spde/hellinger.hpp"
#include "spde/information.hpp"
#include "spde/model.hpp"
#include "spde/oracle.hpp"
#include "spde/simulate.hpp"

struct spde_model {
    spde::SpectralModel impl;
};

struct spde_record {
    spde::ObservationRecord impl;
};

namespace {

thread_local std::string g_last_error;

int set_error(int code, const char* what) {
    g_last_error = what ? what : "unknown error";
    return code;
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        return set_error(SPDE_ERR_INVALID, e.what());
    } catch (const std::runtime_error& e) {
        return set_error(SPDE_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return set_error(SPDE_ERR_INTERNAL, e.what());
    }
}

// JSON has no inf/nan; fall back to strings for those.
nlohmann::json number_or_string(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

}  // namespace

extern "C" {

const char* spde_last_error(void) { return g_last_error.c_str(); }

void spde_string_free(char* s) { delete[] s; }

int spde_model_parse(const char* json, spde_model** out) {
    if (!json || !out) return set_error(SPDE_ERR_INVALID, "null argument");
    return guarded([&] {
        auto* m = new spde_model{spde::model_from_json(json)};
        *out = m;
        return SPDE_OK;
    });
}

int spde_model_to_json(const spde_model* model, char** json_out) {
    if (!model || !json_out) return set_error(SPDE_ERR_INVALID, "null argument");
    return guarded([&] {
        *json_out = dup_string(spde::model_to_json(model->impl));
        return SPDE_OK;
    });
}

void spde_model_free(spde_model* model) { delete model; }

int spde_simulate(const spde_model* model, double theta, int n_steps,
                  uint64_t seed, int retain_state, spde_record** out) {
    if (!model || !out) return set_error(SPDE_ERR_INVALID, "null argument");
    return guarded([&] {
        spde::TimeGrid grid;
        grid.T = model->impl.T;
        grid.n_steps = n_steps;
        auto* rec = new spde_record{spde::simulate_observations(
            model->impl, theta, grid, seed, retain_state != 0)};
        *out = rec;
        return SPDE_OK;
    });
}

int spde_record_save(const spde_record* record, const char* path, int binary) {
    if (!record || !path) return set_error(SPDE_ERR_INVALID, "null argument");
    return guarded([&] {
        spde::record_save(record->impl, path, binary != 0);
        return SPDE_OK;
    });
}

int spde_record_load(const char* path, spde_record** out) {
    if (!path || !out) return set_error(SPDE_ERR_INVALID, "null argument");
    return guarded([&] {
        auto* rec = new spde_record{spde::record_load(path)};
        *out = rec;
        return SPDE_OK;
    });
}

void spde_record_free(spde_record* record) { delete record; }

int spde_estimate(const spde_model* model, const spde_record* record, double* z,
                  double* n, double* theta_hat, int* degenerate) {
    if (!model || !record) return set_error(SPDE_ERR_INVALID, "null argument");
    return guarded([&] {
        const spde::EstimatorResult res = spde::estimate(model->impl, record->impl);
        if (z) *z = res.Z;
        if (n) *n = res.N;
        if (theta_hat) *theta_hat = res.theta_hat;
        if (degenerate) *degenerate = res.degenerate ? 1 : 0;
        return SPDE_OK;
    });
}

int spde_rate_report(const spde_model* model, double theta, char** json_out) {
    if (!model || !json_out) return set_error(SPDE_ERR_INVALID, "null argument");
    return guarded([&] {
        const spde::RateReport rep = spde::rate_report(model->impl, theta);
        nlohmann::json j;
        j["I_n"] = number_or_string(rep.I_n);
        j["v_n_lower"] = number_or_string(rep.v_n_lower);
        j["varn_ratio"] = number_or_string(rep.varn_ratio);
        j["tail_estimate"] = number_or_string(rep.tail_estimate);
        if (rep.has_closed_form) {
            nlohmann::json cf;
            cf["value"] = number_or_string(rep.closed_form.value);
            cf["regime"] = rep.closed_form.regime;
            cf["exponents"] = rep.closed_form.exponents;
            nlohmann::json flags = nlohmann::json::array();
            for (const auto& f : rep.closed_form.validity)
                flags.push_back({{"name", f.name}, {"satisfied", f.satisfied}});
            cf["validity"] = flags;
            j["closed_form"] = cf;
        }
        *json_out = dup_string(j.dump(2));
        return SPDE_OK;
    });
}

int spde_hellinger_report(const spde_model* model, double theta0, double theta1,
                          char** json_out) {
    if (!model || !json_out) return set_error(SPDE_ERR_INVALID, "null argument");
    return guarded([&] {
        const spde::HellingerReport rep =
            theta0 == theta1
                ? spde::hellinger_bound_commuting(model->impl, theta0, theta1)
                : spde::minimax_report(model->impl, theta0, theta1);
        nlohmann::json j;
        j["h2_bound"] = number_or_string(rep.h2_bound);
        j["variant"] = rep.variant;
        j["equivalent"] = rep.equivalent;
        if (rep.has_minimax) {
            j["minimax"] = {{"delta", rep.minimax_delta},
                            {"risk_lower_bound", rep.minimax_risk}};
        } else if (theta0 != theta1) {
            j["minimax"] = "no conclusion at this separation";
        }
        *json_out = dup_string(j.dump(2));
        return SPDE_OK;
    });
}

int spde_experiment_run(const char* config_json, int workers, char** summary_out) {
    if (!config_json) return set_error(SPDE_ERR_INVALID, "null argument");
    return guarded([&] {
        const spde::ExperimentConfig cfg = spde::experiment_from_json(config_json);
        const spde::ExperimentResult res = spde::run_experiment(cfg, workers);
        if (!cfg.csv_path.empty()) spde::emit_outputs(res, cfg);
        nlohmann::json j;
        j["slope"] = number_or_string(res.fit.slope);
        j["intercept"] = number_or_string(res.fit.intercept);
        j["stderr_slope"] = number_or_string(res.fit.stderr_slope);
        j["r2"] = number_or_string(res.fit.r2);
        nlohmann::json rmse = nlohmann::json::array();
        for (double v : res.rmse) rmse.push_back(number_or_string(v));
        j["rmse"] = rmse;
        j["values"] = cfg.values;
        j["degenerate_counts"] = res.degenerate_counts;
        j["under_resolved_fraction"] = res.under_resolved;
        j["degenerate_abort"] = res.degenerate_abort;
        if (summary_out) *summary_out = dup_string(j.dump(2));
        if (res.degenerate_abort)
            return set_error(SPDE_ERR_DEGENERATE,
                             "more than 10% degenerate replicates at a sweep value");
        return static_cast<int>(SPDE_OK);
    });
}

int spde_oracle_check(char** json_out) {
    return guarded([&] {
        nlohmann::json j;
        using spde::TimeGrid;
        const std::complex<double> l0{-1.0, 0.0};
        const std::complex<double> l1{-1.0, 2.0};
        {
            TimeGrid g{10.0, 1024};
            const auto rs = spde::oracle::check_rs_norm(l0, g);
            j["rs_norm"] = {{"norm", rs.norm}, {"bound", rs.bound}, {"pass", rs.pass}};
        }
        {
            TimeGrid g{5.0, 1024};
            j["perturbation_residual"] =
                spde::oracle::check_perturbation_identity(l0, {-2.0, 0.0}, g);
            j["perturbation_residual_complex"] =
                spde::oracle::check_perturbation_identity(l0, l1, g);
        }
        {
            TimeGrid g{4.0, 512};
            j["cov_factorization_residual"] =
                spde::oracle::check_cov_factorization(l0, g);
            j["matrix_hellinger"] = spde::oracle::matrix_hellinger(
                {-1.0, 0.0}, {-1.1, 0.0}, 1.0, 0.1, TimeGrid{4.0, 256});
        }
        if (json_out) *json_out = dup_string(j.dump(2));
        return SPDE_OK;
    });
}

}  // extern "C"
