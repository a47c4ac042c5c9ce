#pragma once

#include <complex>

#include "spde/simulate.hpp"

namespace spde::oracle {

// Dense lower-triangular discretization of the mode solution operator
// (S f)(t_i) = sum_{j<i} dt e^{lambda (t_i - t_j)} f(t_j), t_i = i dt.
// n_steps capped at 2048 to keep dense linear algebra cheap.

struct RsNormCheck {
    double norm;   // largest singular value of max(|Re lambda|, 1/T) * S
    double bound;  // 1 + C dt tolerance actually used
    bool pass;
};

RsNormCheck check_rs_norm(std::complex<double> lambda, const TimeGrid& grid);

// Residual of S1 - S0 = (lambda1 - lambda0) S0 S1 (both orderings), max-abs.
double check_perturbation_identity(std::complex<double> lambda0,
                                   std::complex<double> lambda1,
                                   const TimeGrid& grid);

// Max-abs mismatch between S S^* / dt and the closed-form covariance kernel.
double check_cov_factorization(std::complex<double> lambda, const TimeGrid& grid);

// Exact squared Hellinger distance between the two discretized observation
// laws with covariances Q_i = eps^2 dt Id + b^2 dt^2 C_i, via the joint
// eigenvalues of (Q0, Q1).  mult = 2 treats the mode as a conjugate pair
// (each complex eigenvalue counts twice in the real law).
double matrix_hellinger(std::complex<double> lambda0, std::complex<double> lambda1,
                        double b, double eps, const TimeGrid& grid, int mult = 1);

}  // namespace spde::oracle
