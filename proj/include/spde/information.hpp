#pragma once

#include <map>
#include <string>
#include <vector>

#include "spde/model.hpp"

namespace spde {

// Mode-sum information functional; +inf sentinel when the per-mode summands
// stop decaying over the last retained quartile (divergence heuristic).
double info_In(const SpectralModel& model, double theta);

// Minimax lower-bound rate; +inf when no mode is informative.
double lower_bound_rate(const SpectralModel& model);

// Denominator-concentration diagnostic: LHS of the variance condition over
// the squared information.  The estimator guarantee needs this -> 0.
double varn_condition_ratio(const SpectralModel& model, double theta);

// Integral-comparison bound on the mode-sum tail dropped by truncation at K.
// +inf when no decay exponent can be inferred (fewer than 8 modes, or flat
// magnitudes); 0 for a single-mode model.
double truncation_tail(const SpectralModel& model);

struct RateParams {
    int d = 1;
    double rho = 1.0;
    double beta = 0.0;
    double T = 1.0;
    double eps = 0.0;
    double nu = 1.0;
    double sigma = 1.0;
    double theta_bar = 1.0;
};

struct ValidityFlag {
    std::string name;
    bool satisfied;
};

struct ClosedFormRate {
    double value = 0.0;
    std::map<std::string, double> exponents;  // axis -> exponent
    std::string regime;
    std::vector<ValidityFlag> validity;
};

// Closed-form parametric rates for example_id in
// {"ou", "frac_laplacian", "transport", "source"}.
ClosedFormRate parametric_rate(const std::string& example_id, const RateParams& p);

// Closed-form nonparametric pointwise rates for example_id in
// {"diffusivity", "transport", "source"}.  The alpha conditions are evaluated
// at the given finite (T, eps, nu) by dropping the limsup (finite-n proxy).
ClosedFormRate nonparametric_rate(const std::string& example_id, double alpha,
                                  int d, double beta, double T, double eps,
                                  double nu);

struct RateReport {
    double I_n = 0.0;
    double v_n_lower = 0.0;
    double varn_ratio = 0.0;
    double tail_estimate = 0.0;
    bool has_closed_form = false;
    ClosedFormRate closed_form;
};

RateReport rate_report(const SpectralModel& model, double theta);

}  // namespace spde
