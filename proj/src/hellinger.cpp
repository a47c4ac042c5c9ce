#include "spde/hellinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spde/clipped.hpp"

namespace spde {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinimaxRisk = 0.0669872981077806766;  // (2 - sqrt 3)/4
}

std::pair<double, double> hellinger_scalar(double sigma0, double sigma1) {
    if (sigma0 <= 0.0 || sigma1 <= 0.0)
        throw std::invalid_argument("sigma must be > 0");
    const double s = sigma1 / sigma0;
    const double exact = 2.0 - 2.0 * std::sqrt(2.0 * s / (s * s + 1.0));
    const double diff = s - 1.0 / s;
    const double bound = 0.25 * diff * diff;
    return {exact, bound};
}

double hellinger_diagonal(const std::vector<std::pair<double, int>>& tau_mult) {
    double sum = 0.0;
    for (const auto& [tau, mult] : tau_mult) {
        if (tau <= 0.0) throw std::invalid_argument("tau must be > 0");
        const double d = std::sqrt(tau) - 1.0 / std::sqrt(tau);
        sum += mult * d * d;
    }
    return 0.25 * sum;
}

double f_factor(double lambda) {
    if (lambda > 700.0) return kInf;
    double f2;
    if (std::abs(lambda) < 1e-4) {
        f2 = 0.5 + lambda / 6.0 + lambda * lambda / 24.0;
    } else {
        f2 = (std::expm1(lambda) - lambda) / (lambda * lambda);
    }
    return std::sqrt(f2);
}

double alpha_theta(double r_plus_max, double T) {
    if (r_plus_max < 0.0)
        throw std::invalid_argument("r_plus_max must be >= 0");
    if (2.0 * r_plus_max * T > 1400.0) return kInf;
    return std::sqrt(0.75 + 0.25 * std::exp(2.0 * r_plus_max * T));
}

namespace {

// True when the last quartile of (ordered) summands carries at least as much
// mass as the quartile before it.
bool tail_not_decaying(const std::vector<double>& s) {
    const std::size_t n = s.size();
    if (n < 8) return false;
    const std::size_t q = n / 4;
    double last = 0.0, prev = 0.0;
    for (std::size_t k = n - q; k < n; ++k) last += s[k];
    for (std::size_t k = n - 2 * q; k < n - q; ++k) prev += s[k];
    return last >= prev && last > 0.0;
}

}  // namespace

HellingerReport hellinger_bound_commuting(const SpectralModel& model,
                                          double theta0, double theta1) {
    for (double th : {theta0, theta1})
        if (th < model.theta_lo || th > model.theta_hi)
            throw std::invalid_argument("theta outside [theta_lo, theta_hi]");
    const double T = model.T;
    const double eps = model.eps;

    // Operator-norm factor: contractive models have r_plus = 0, alpha = 1.
    double r_plus = 0.0;
    for (const ModeSpec& md : model.modes)
        for (double th : {theta0, theta1})
            r_plus = std::max(r_plus, md.m + th * std::real(md.ell));
    const double alpha0 = alpha_theta(r_plus, T);
    const double eps_t = eps / alpha0;

    std::vector<double> s_con, s_gen;
    s_con.reserve(model.modes.size());
    s_gen.reserve(model.modes.size());
    double sum_con = 0.0, sum_gen = 0.0;
    for (const ModeSpec& md : model.modes) {
        const std::complex<double> dlam = (theta1 - theta0) * md.ell;
        const double dlam2 = std::norm(dlam);
        const double r0 = md.m + theta0 * std::real(md.ell);
        const double r1 = md.m + theta1 * std::real(md.ell);
        const double b2 = md.b * md.b;
        auto g = [&](double r, double e) {
            const double c = e * clip_low(r, 1.0, T);
            return 1.0 / (c * c / b2 + 1.0);
        };
        const double con = (T / 4.0) * md.mult * dlam2 * g(r0, eps) * g(r1, eps) *
                           (clip_inv(r1, 1.0, T) + clip_inv(r0, 1.0, T));
        const double f0 = f_factor(2.0 * T * r0);
        const double f1 = f_factor(2.0 * T * r1);
        const double gen = (T * T / 2.0) * md.mult * dlam2 * g(r0, eps_t) *
                           g(r1, eps_t) * (f1 * f1 + f0 * f0);
        s_con.push_back(con);
        s_gen.push_back(gen);
        sum_con += con;
        sum_gen += gen;
    }
    const bool contractive_ok = r_plus == 0.0;
    if (tail_not_decaying(s_con)) sum_con = kInf;
    if (tail_not_decaying(s_gen)) sum_gen = kInf;

    HellingerReport rep;
    if (contractive_ok && sum_con <= sum_gen) {
        rep.h2_bound = sum_con;
        rep.variant = "commuting_contractive";
    } else {
        rep.h2_bound = sum_gen;
        rep.variant = "commuting_general";
    }
    rep.equivalent = std::isfinite(rep.h2_bound);
    return rep;
}

EquivalenceSeries equivalence_series(double m, double m1, int d, double delta,
                                     double T, int K_max) {
    if (m < m1 || m1 < 0.0)
        throw std::invalid_argument("need m >= m1 >= 0");
    if (delta <= 0.0 || d < 1 || K_max < 1)
        throw std::invalid_argument("invalid series parameters");
    EquivalenceSeries out;
    out.exponent = (2.0 * m1 - m) / d;
    double sum = 0.0;
    for (int k = 1; k <= K_max; ++k)
        sum += std::pow(static_cast<double>(k), out.exponent);
    out.partial_sum = T * delta * delta * sum;
    out.equivalent = out.exponent < -1.0;  // m1 < (m - d)/2
    return out;
}

HellingerReport minimax_report(const SpectralModel& model, double theta0,
                               double theta1) {
    if (theta0 == theta1)
        throw std::invalid_argument("minimax_report needs theta0 != theta1");
    HellingerReport rep = hellinger_bound_commuting(model, theta0, theta1);
    if (std::isfinite(rep.h2_bound) && std::sqrt(rep.h2_bound) <= 1.0) {
        rep.has_minimax = true;
        rep.minimax_delta = std::abs(theta1 - theta0);
        rep.minimax_risk = kMinimaxRisk;
    }
    return rep;
}

}  // namespace spde
