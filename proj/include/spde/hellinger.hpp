#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spde/model.hpp"

namespace spde {

struct HellingerReport {
    bool has_exact = false;
    double h2_exact = 0.0;
    double h2_bound = 0.0;
    std::string variant;  // scalar | diagonal | commuting_general | commuting_contractive
    bool equivalent = false;
    bool has_minimax = false;
    double minimax_delta = 0.0;
    double minimax_risk = 0.0;
};

// Squared Hellinger distance between centered Gaussians N(0, sigma0^2) and
// N(0, sigma1^2): exact value and the quadratic upper bound.
std::pair<double, double> hellinger_scalar(double sigma0, double sigma1);

// Diagonal cylindrical bound 1/4 sum mult (sqrt(tau) - 1/sqrt(tau))^2 over
// variance ratios tau.
double hellinger_diagonal(const std::vector<std::pair<double, int>>& tau_mult);

// f(lambda) = ((e^lambda - 1 - lambda)/lambda^2)^{1/2}, f(0) = 1/sqrt(2);
// +inf sentinel past the overflow range.
double f_factor(double lambda);

// alpha with alpha^2 = 3/4 + e^{2 r_plus_max T}/4; equals 1 for contractive
// generators.
double alpha_theta(double r_plus_max, double T);

// Mode-sum Hellinger bounds between observation laws at theta0 and theta1;
// reports the smaller applicable variant.
HellingerReport hellinger_bound_commuting(const SpectralModel& model,
                                          double theta0, double theta1);

struct EquivalenceSeries {
    double partial_sum = 0.0;
    double exponent = 0.0;
    bool equivalent = false;  // series converges iff exponent < -1
};

// Partial sums of T delta^2 sum_k k^{(2 m1 - m)/d} for the noiseless
// equivalence criterion m1 < (m - d)/2.
EquivalenceSeries equivalence_series(double m, double m1, int d, double delta,
                                     double T, int K_max);

// Two-point minimax statement: when the Hellinger bound stays <= 1 the
// testing risk at separation |theta1 - theta0| is at least (2 - sqrt 3)/4.
HellingerReport minimax_report(const SpectralModel& model, double theta0,
                               double theta1);

}  // namespace spde
