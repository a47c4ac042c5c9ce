#pragma once

#include <complex>
#include <string>
#include <vector>

namespace spde {

// One spectral mode of the common eigenbasis of (M, Lambda, B).  The drift
// eigenvalue at parameter theta is lambda(theta) = m + theta*ell.  A conjugate
// lattice pair is stored once with mult=2; self-conjugate modes have mult=1.
struct ModeSpec {
    double m = 0.0;                       // eigenvalue of M (real, <= 0)
    std::complex<double> ell{0.0, 0.0};   // eigenvalue of Lambda, Re <= 0
    double b = 1.0;                       // eigenvalue of B, > 0
    int mult = 1;                         // real multiplicity, 1 or 2
    std::string label;                    // e.g. lattice point "2,-1"
};

// Construction recipe for the worked model families; this is what serializes.
struct ModelDescriptor {
    std::string family;        // "ou", "frac_laplacian", "transport", "source"
    int d = 1;
    double nu = 1.0;
    double beta = 0.0;
    double rho = 1.0;
    double sigma = 1.0;
    std::vector<double> xi;    // transport direction
    std::string base = "torus";  // "torus" or "weyl" eigenvalue source
    int K_lattice = 0;
    int K_max = 0;
    double weyl_c = 1.0;
    double eps = 0.0;
    double T = 1.0;
    double theta_lo = 0.0;
    double theta_hi = 1.0;
};

struct SpectralModel {
    std::vector<ModeSpec> modes;
    double theta_lo = 0.0;
    double theta_hi = 1.0;
    double eps = 0.0;          // observation noise level, in [0,1]
    double T = 1.0;            // horizon, >= 1
    int dim = 1;
    double domC = 10.0;        // constant in |Im lambda| <= C(1+|Re lambda|)
    std::string meta;
    bool has_descriptor = false;
    ModelDescriptor descriptor;

    // Throws std::invalid_argument on the first violated invariant.
    void validate() const;
};

struct ModeLambda {
    std::complex<double> lambda;
    double r;  // Re lambda
    double j;  // Im lambda
};

// Base eigenvalue magnitude of -Delta (or a proxy), with pair multiplicity.
struct BaseEig {
    double mu;
    int mult;
    std::string label;
};

// Torus Laplacian eigenvalues: one ModeSpec per conjugate-pair representative
// l in Z^d with |l| <= K_lattice, m = -(2 pi)^2 nu |l|^2, mult 2 except l=0.
// ell and b stay at placeholder values for the family assemblers.
std::vector<ModeSpec> eigs_torus_laplacian(int d, double nu, int K_lattice,
                                           std::size_t mode_budget = 200000);

// Weyl-law proxy magnitudes |lambda_k| = c * k^{2/d}, k = 1..K_max, mult 1.
std::vector<double> eigs_weyl_proxy(int d, double c, int K_max);

// Base eigenvalue lists feeding the family assemblers below.
std::vector<BaseEig> base_eigs_torus(int d, int K_lattice,
                                     std::size_t mode_budget = 200000);
std::vector<BaseEig> base_eigs_weyl(int d, double c, int K_max);

SpectralModel model_fractional_laplacian(int d, double rho, double beta,
                                         const std::vector<BaseEig>& base_eigs,
                                         double eps, double T,
                                         double theta_lo, double theta_hi);

SpectralModel model_transport(int d, double nu, const std::vector<double>& xi,
                              double beta, int K_lattice, double eps, double T,
                              double theta_lo, double theta_hi);

SpectralModel model_source(int d, double nu, double beta,
                           const std::vector<BaseEig>& base_eigs, double eps,
                           double T, double theta_lo, double theta_hi);

SpectralModel model_ou(double sigma, double eps, double T, double theta_lo,
                       double theta_hi);

// lambda_k(theta) = m_k + theta*ell_k; throws if any Re lambda > 0.
std::vector<ModeLambda> assemble_lambda(const SpectralModel& model,
                                        double theta);

// Family construction from a descriptor, and JSON round-trip.
SpectralModel model_from_descriptor(const ModelDescriptor& desc);
std::string model_to_json(const SpectralModel& model);
SpectralModel model_from_json(const std::string& text);

}  // namespace spde
