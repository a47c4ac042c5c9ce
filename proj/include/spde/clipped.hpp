#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

namespace spde {

// Horizon-clipped magnitude powers: clip_inv(a,p,T) = min(|a|^-p, T^p) with
// the zero-eigenvalue convention clip_inv(0,p,T) = T^p, and its reciprocal
// clip_low(a,p,T) = max(|a|^p, T^-p).
inline double clip_inv(double a_abs, double p, double T) {
    a_abs = std::abs(a_abs);
    if (a_abs == 0.0) return std::pow(T, p);
    return std::min(std::pow(a_abs, -p), std::pow(T, p));
}

inline double clip_inv(std::complex<double> a, double p, double T) {
    return clip_inv(std::abs(a), p, T);
}

// Defined as the exact reciprocal so clip_inv * clip_low == 1 holds in
// floating point, not just mathematically.
inline double clip_low(double a_abs, double p, double T) {
    return 1.0 / clip_inv(a_abs, p, T);
}

inline double clip_low(std::complex<double> a, double p, double T) {
    return clip_low(std::abs(a), p, T);
}

}  // namespace spde
