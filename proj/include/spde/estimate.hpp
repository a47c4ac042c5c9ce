#pragma once

#include <vector>

#include "spde/model.hpp"
#include "spde/simulate.hpp"

namespace spde {

struct EstimatorResult {
    double Z = 0.0;
    double N = 0.0;
    double theta_hat = 0.0;
    bool degenerate = false;
    std::vector<double> per_mode_N;
};

// Triangular kernel psi_{v,s}(a) = v_+ ^ (min(1/a, T-s) - v)_+ and its
// v-derivative (right-limit convention at the breakpoints).
double psi(double v, double s, double a_abs, double T);
double psi_dt(double v, double s, double a_abs, double T);

// Per-mode kernel weight kappa_k evaluated at theta_bar = model.theta_hi.
double kernel_weight(const ModeSpec& mode, double theta_bar, double eps, double T);

// Z/N estimator over strictly ordered increment pairs j < i.  Set
// prune = false only in tests; pruning skips provably zero kernel terms.
EstimatorResult estimate(const SpectralModel& model, const ObservationRecord& obs,
                         bool prune = true);

}  // namespace spde
