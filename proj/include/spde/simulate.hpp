#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "spde/model.hpp"

namespace spde {

struct TimeGrid {
    double T = 1.0;
    int n_steps = 1;
    double dt() const { return T / n_steps; }
};

// Exact one-step transition of the augmented pair (x, integral of x):
//   (x+, I) = A (x, 0) + innovation,  A = [[e^{lambda dt}, 0], [phi, 1]]
// with innovation covariance Sigma (Hermitian PSD), normalized to E|dw|^2=dt.
struct StepMoments {
    std::complex<double> exp_l;   // e^{lambda dt}
    std::complex<double> phi;     // (e^{lambda dt}-1)/lambda, -> dt at 0
    double var_x;                 // E|x innovation|^2
    double var_i;                 // E|I innovation|^2
    std::complex<double> cov_xi;  // E[x_innov * conj(I_innov)]
};

StepMoments step_moments(std::complex<double> lambda, double dt);

struct ObservationRecord {
    double theta_true = 0.0;
    TimeGrid grid;
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
    std::string rng_algo = "xoshiro256ss-boxmuller-v1";
    // dY[k][i-1] = Delta Y_{k,i}, i = 1..n_steps.
    std::vector<std::vector<std::complex<double>>> dY;
    // Optional retained state paths: state[k][i] = x_k(t_i), i = 0..n_steps.
    std::vector<std::vector<std::complex<double>>> state;
    bool has_state() const { return !state.empty(); }
};

ObservationRecord simulate_observations(const SpectralModel& model, double theta,
                                        const TimeGrid& grid, std::uint64_t seed,
                                        bool retain_state = false,
                                        std::uint64_t replicate = 0);

// Closed-form mode covariance E[x(t) conj(x(s))] for the zero-start process.
std::complex<double> cov_kernel(std::complex<double> lambda, double t, double s);

struct EmpiricalCov {
    std::complex<double> mean;
    double std_error;
};

EmpiricalCov empirical_mode_covariance(const std::vector<ObservationRecord>& records,
                                       std::size_t k, int t_idx, int s_idx);

// Trajectory dump round-trip; binary is mode-major little-endian doubles.
void record_save(const ObservationRecord& rec, const std::string& path, bool binary);
ObservationRecord record_load(const std::string& path);

}  // namespace spde
