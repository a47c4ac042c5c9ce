#include "spde/information.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spde/clipped.hpp"

namespace spde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double info_summand(const ModeSpec& md, double theta, double theta_bar,
                    double eps, double T) {
    const std::complex<double> lam_bar = md.m + theta_bar * md.ell;
    const std::complex<double> lam = md.m + theta * md.ell;
    const double r_bar = std::real(lam_bar);
    const double r = std::real(lam);
    const double eps4 = eps * eps * eps * eps;
    const double b4 = std::pow(md.b, 4.0);
    const double denom = eps4 * clip_low(r_bar, 1.0, T) *
                             clip_low(std::abs(lam_bar), 3.0, T) / b4 +
                         1.0;
    return md.mult * std::norm(md.ell) / denom * clip_inv(r, 1.0, T);
}

double lb_summand(const ModeSpec& md, double theta_bar, double eps, double T) {
    const std::complex<double> lam_bar = md.m + theta_bar * md.ell;
    const double r_bar = std::real(lam_bar);
    const double eps4 = eps * eps * eps * eps;
    const double b4 = std::pow(md.b, 4.0);
    const double denom = eps4 * clip_low(r_bar, 4.0, T) / b4 + 1.0;
    return md.mult * std::norm(md.ell) / denom * clip_inv(r_bar, 1.0, T);
}

// True when the per-mode summands stop decaying over the last quartile of the
// retained (magnitude-ordered) modes.
bool tail_not_decaying(const std::vector<double>& summands) {
    const std::size_t n = summands.size();
    if (n < 8) return false;
    const std::size_t q = n / 4;
    double last = 0.0, prev = 0.0;
    for (std::size_t k = n - q; k < n; ++k) last += summands[k];
    for (std::size_t k = n - 2 * q; k < n - q; ++k) prev += summands[k];
    return last >= prev && last > 0.0;
}

double raw_info(const SpectralModel& model, double theta,
                std::vector<double>* summands_out = nullptr) {
    double sum = 0.0;
    std::vector<double> summands;
    summands.reserve(model.modes.size());
    for (const ModeSpec& md : model.modes) {
        const double s =
            info_summand(md, theta, model.theta_hi, model.eps, model.T);
        summands.push_back(s);
        sum += s;
    }
    if (summands_out) *summands_out = std::move(summands);
    else if (tail_not_decaying(summands)) return kInf;
    return model.T * sum;
}

}  // namespace

double info_In(const SpectralModel& model, double theta) {
    if (theta < model.theta_lo || theta > model.theta_hi)
        throw std::invalid_argument("theta outside [theta_lo, theta_hi]");
    return raw_info(model, theta);
}

double lower_bound_rate(const SpectralModel& model) {
    double sum = 0.0;
    for (const ModeSpec& md : model.modes)
        sum += lb_summand(md, model.theta_hi, model.eps, model.T);
    if (sum <= 0.0) return kInf;
    return 1.0 / std::sqrt(model.T * sum);
}

double varn_condition_ratio(const SpectralModel& model, double theta) {
    const double T = model.T;
    const double eps4 = std::pow(model.eps, 4.0);
    double lhs = 0.0, info = 0.0;
    for (const ModeSpec& md : model.modes) {
        const std::complex<double> lam_bar = md.m + model.theta_hi * md.ell;
        const std::complex<double> lam = md.m + theta * md.ell;
        const double r_bar = std::real(lam_bar);
        const double r = std::real(lam);
        const double b4 = std::pow(md.b, 4.0);
        const double D = eps4 * clip_low(r_bar, 1.0, T) *
                             clip_low(std::abs(lam_bar), 3.0, T) / b4 +
                         1.0;
        const double ell2 = std::norm(md.ell);
        lhs += md.mult * ell2 * ell2 / (D * D) *
               (eps4 * clip_low(std::abs(lam_bar), 1.0, T) / b4 +
                clip_inv(r, 3.0, T));
        info += md.mult * ell2 / D * clip_inv(r, 1.0, T);
    }
    if (info <= 0.0) return kInf;
    return (T * lhs) / (T * info * T * info);
}

double truncation_tail(const SpectralModel& model) {
    const std::size_t n = model.modes.size();
    if (n == 1) return 0.0;
    if (n < 8) return kInf;
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k)
        g[k] = lb_summand(model.modes[k], model.theta_hi, model.eps, model.T);
    // Log-log slope of the summand against mode index over the last quartile.
    const std::size_t q = std::max<std::size_t>(2, n / 4);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t k = n - q; k < n; ++k) {
        if (g[k] <= 0.0) continue;
        const double x = std::log(static_cast<double>(k + 1));
        const double y = std::log(g[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    if (cnt < 2) {
        bool all_zero = true;
        for (std::size_t k = n - q; k < n; ++k) all_zero = all_zero && g[k] == 0.0;
        return all_zero ? 0.0 : kInf;
    }
    const double denom = cnt * sxx - sx * sx;
    if (denom <= 0.0) return kInf;
    const double p = (cnt * sxy - sx * sy) / denom;
    if (p >= -1.0 - 1e-9) return kInf;
    // Integral comparison: sum_{k>K} g_K (k/K)^p <= g_K * K / (-p-1).
    return model.T * g[n - 1] * static_cast<double>(n) / (-p - 1.0);
}

namespace {

void flag(ClosedFormRate& r, const std::string& name, bool ok) {
    r.validity.push_back({name, ok});
}

// -log(eps) clamped so eps = 0 degrades to the limiting ratio instead of
// inf/inf; the alpha flags are finite-n proxies anyway.
double log_inv(double x) {
    return -std::log(std::max(x, 1e-300));
}

}  // namespace

ClosedFormRate parametric_rate(const std::string& id, const RateParams& p) {
    ClosedFormRate r;
    const double d = static_cast<double>(p.d);
    if (id == "ou") {
        const bool ergodic = p.theta_bar * p.T >= 1.0;
        const double noise_factor =
            p.eps * p.eps * p.theta_bar * p.theta_bar / (p.sigma * p.sigma);
        const bool noisy = noise_factor >= 1.0;
        r.value = std::max(std::sqrt(p.theta_bar / p.T), 1.0 / p.T) *
                  std::max(noise_factor, 1.0);
        r.exponents["T"] = ergodic ? -0.5 : -1.0;
        r.exponents["eps"] = noisy ? 2.0 : 0.0;
        r.exponents["theta_bar"] = (ergodic ? 0.5 : 0.0) + (noisy ? 2.0 : 0.0);
        r.exponents["sigma"] = noisy ? -2.0 : 0.0;
        r.regime = std::string(ergodic ? "ergodic" : "null-recurrent") + "|" +
                   (noisy ? "noise-dominated" : "noise-free");
        flag(r, "theta_bar > 0", p.theta_bar > 0.0);
        return r;
    }
    if (id == "frac_laplacian") {
        const bool dim_ok = d < (6.0 + 8.0 * p.beta) * p.rho;
        flag(r, "d < (6+8*beta)*rho", dim_ok);
        if (!dim_ok) {
            r.regime = "identifiable";
            return r;
        }
        const double e_eps = (2.0 * p.rho + d) / (4.0 * p.rho * (1.0 + p.beta));
        r.exponents["T"] = -0.5;
        r.exponents["eps"] = e_eps;
        r.value = std::pow(p.T, -0.5) * std::pow(p.eps, e_eps);
        r.regime = "standard";
        return r;
    }
    if (id == "transport") {
        const bool dim_ok = d < 8.0 + 8.0 * p.beta;
        flag(r, "d < 8+8*beta", dim_ok);
        flag(r, "nu^(3+8*beta) >= eps^8 * T^-(5+8*beta)",
             std::pow(p.nu, 3.0 + 8.0 * p.beta) >=
                 std::pow(p.eps, 8.0) * std::pow(p.T, -(5.0 + 8.0 * p.beta)));
        if (!dim_ok) {
            r.regime = "identifiable";
            return r;
        }
        r.exponents["T"] = -0.5;
        if (p.nu >= std::pow(p.eps, 1.0 / (1.0 + 2.0 * p.beta))) {
            r.regime = "nu-dominant";
            r.exponents["nu"] = (2.0 + d + 2.0 * p.beta) / (4.0 + 4.0 * p.beta);
            r.exponents["eps"] = d / (4.0 + 4.0 * p.beta);
        } else {
            r.regime = "eps-dominant";
            r.exponents["nu"] =
                (5.0 + d + 8.0 * p.beta) / (10.0 + 16.0 * p.beta);
            r.exponents["eps"] = 2.0 * d / (5.0 + 8.0 * p.beta);
        }
        r.value = std::pow(p.T, -0.5) * std::pow(p.nu, r.exponents["nu"]) *
                  std::pow(p.eps, r.exponents["eps"]);
        return r;
    }
    if (id == "source") {
        const bool dim_ok = d < 10.0 + 8.0 * p.beta;
        flag(r, "d < 10+8*beta", dim_ok);
        if (!dim_ok) {
            r.regime = "identifiable";
            return r;
        }
        r.exponents["T"] = -0.5;
        if (p.d == 1) {
            r.regime = "d=1";
            r.exponents["nu"] = 0.25;
            r.value = std::pow(p.T, -0.5) * std::pow(p.nu, 0.25);
        } else if (p.d == 2) {
            r.regime = "d=2 (log factor)";
            r.exponents["nu"] = 0.5;
            const double logfac = 1.0 + log_inv(p.eps);  // log(e/eps)
            r.value = std::pow(p.T, -0.5) * std::sqrt(p.nu) / std::sqrt(logfac);
        } else {
            r.regime = "d>=3";
            r.exponents["nu"] = d / 4.0;
            r.exponents["eps"] = (d - 2.0) / (4.0 + 4.0 * p.beta);
            r.value = std::pow(p.T, -0.5) * std::pow(p.nu, d / 4.0) *
                      std::pow(p.eps, r.exponents["eps"]);
        }
        return r;
    }
    throw std::invalid_argument("unknown parametric example: " + id);
}

ClosedFormRate nonparametric_rate(const std::string& id, double alpha, int di,
                                  double beta, double T, double eps, double nu) {
    if (alpha <= 0.0) throw std::invalid_argument("alpha must be > 0");
    ClosedFormRate r;
    const double d = static_cast<double>(di);
    const double lT = std::log(T);
    const double le = log_inv(eps);

    if (id == "diffusivity") {
        flag(r, "1 <= d < 6+8*beta", di >= 1 && d < 6.0 + 8.0 * beta);
        const double alpha_min =
            ((5.0 + 5.0 * beta) * lT + 5.0 * le) /
            ((2.0 + 2.0 * beta) * lT + (10.0 + 4.0 * beta) * le);
        flag(r, "alpha > alpha_min (finite-n proxy)", alpha > alpha_min);
        const bool small_T = T <= std::pow(eps, (1.0 - alpha) / (1.0 + beta));
        if (small_T) {
            r.regime = "parametric-scaling";
            const double q = alpha / (2.0 * alpha + d);
            r.exponents["T"] = -q;
            r.exponents["eps"] = q * (d + 2.0) / (2.0 + 2.0 * beta);
            r.value = std::pow(T * std::pow(eps, -(d + 2.0) / (2.0 + 2.0 * beta)), -q);
        } else {
            r.regime = "large-T-ellbow";
            const double q = alpha / (2.0 * alpha + 3.0 + 4.0 * beta);
            r.exponents["T"] = -q;
            r.exponents["eps"] = q * (5.0 + 4.0 * beta) / (2.0 + 2.0 * beta);
            r.value =
                std::pow(T * std::pow(eps, -(5.0 + 4.0 * beta) / (2.0 + 2.0 * beta)), -q);
        }
        return r;
    }
    if (id == "transport") {
        flag(r, "1 <= d <= 7", di >= 1 && di <= 7);
        flag(r, "alpha > 0", alpha > 0.0);
        const bool small_T = T <= std::pow(eps, -alpha) * std::pow(nu, 1.0 - alpha);
        if (small_T) {
            r.regime = "parametric-scaling";
            const double q = alpha / (2.0 * alpha + d);
            r.exponents["T"] = -q;
            r.exponents["eps"] = q * d / 2.0;
            r.exponents["nu"] = q * (d + 2.0) / 2.0;
            r.value = std::pow(
                std::pow(T, -1.0) * std::pow(eps, d / 2.0) * std::pow(nu, (d + 2.0) / 2.0),
                q);
        } else {
            r.regime = "large-T-ellbow";
            r.exponents["T"] = -alpha / (2.0 * alpha + 5.0);
            r.exponents["eps"] = 5.0 * alpha / (4.0 * alpha + 10.0);
            r.exponents["nu"] = 7.0 * alpha / (4.0 * alpha + 10.0);
            r.value = std::pow(T, r.exponents["T"]) * std::pow(eps, r.exponents["eps"]) *
                      std::pow(nu, r.exponents["nu"]);
        }
        return r;
    }
    if (id == "source") {
        flag(r, "1 <= d <= 9", di >= 1 && di <= 9);
        RateParams pp;
        pp.d = di;
        pp.beta = 0.0;
        pp.T = T;
        pp.eps = eps;
        pp.nu = nu;
        const double v_par = parametric_rate("source", pp).value;
        const double lnu = log_inv(nu);
        const double lle = std::log(std::max(le, 1e-300));
        const bool parametric_branch =
            v_par >= std::pow(nu * eps, (2.0 * alpha + d) / 4.0);
        double num, den;
        if (parametric_branch) {
            if (di == 1) {
                num = lT - 2.0 * d * le;
                den = 2.0 * lT + 4.0 * le + (d + 1.0) * lnu;
            } else if (di == 2) {
                num = lT + lle - 2.0 * d * le;
                den = 2.0 * lT + 2.0 * lle + 4.0 * le + (d + 1.0) * lnu;
            } else {
                num = lT - (1.5 * d + 1.0) * le;
                den = 2.0 * lT + (d + 2.0) * le + (d + 1.0) * lnu;
            }
        } else {
            if (di == 1) {
                num = lT - (2.0 * d + 6.0) * le;
                den = 2.0 * lT + 8.0 * le + (d + 5.0) * lnu;
            } else if (di == 2) {
                num = lT + lle - (2.0 * d + 6.0) * le;
                den = 2.0 * lT + 2.0 * lle + 8.0 * le + (d + 5.0) * lnu;
            } else {
                num = lT - 11.5 * le;
                den = 2.0 * lT + 9.0 * le + 8.0 * lnu;
            }
        }
        flag(r, "alpha > log-ratio bound (finite-n proxy)",
             den != 0.0 && alpha > num / den);
        if (parametric_branch) {
            r.regime = "parametric-scaling";
            const double q = 2.0 * alpha / (2.0 * alpha + d);
            r.value = std::pow(v_par, q);
            r.exponents["T"] = -q / 2.0;
            r.exponents["nu"] = q * d / 4.0;
            r.exponents["eps"] = q * std::max(d - 2.0, 0.0) / 4.0;
        } else if (di <= 2) {
            r.regime = "ellbow-low-d";
            const double q = 2.0 * alpha / (2.0 * alpha + d + 4.0);
            r.value = std::pow(nu * eps * v_par, q);
            r.exponents["T"] = -q / 2.0;
            r.exponents["nu"] = q * (d + 4.0) / 4.0;
            r.exponents["eps"] = q;
        } else {
            r.regime = "ellbow-high-d";
            const double q = 2.0 * alpha / (2.0 * alpha + 7.0);
            r.value = std::pow(std::pow(nu * eps, (7.0 - d) / 4.0) * v_par, q);
            r.exponents["T"] = -q / 2.0;
            r.exponents["nu"] = q * 7.0 / 4.0;
            r.exponents["eps"] = q * 5.0 / 4.0;
        }
        return r;
    }
    throw std::invalid_argument("unknown nonparametric example: " + id);
}

RateReport rate_report(const SpectralModel& model, double theta) {
    RateReport rep;
    rep.I_n = info_In(model, theta);
    rep.v_n_lower = lower_bound_rate(model);
    rep.varn_ratio = varn_condition_ratio(model, theta);
    rep.tail_estimate = truncation_tail(model);
    if (model.has_descriptor) {
        const ModelDescriptor& d = model.descriptor;
        RateParams p;
        p.d = d.d;
        p.rho = d.rho;
        p.beta = d.beta;
        p.T = d.T;
        p.eps = d.eps;
        p.nu = d.nu;
        p.sigma = d.sigma;
        p.theta_bar = d.theta_hi;
        rep.closed_form = parametric_rate(d.family, p);
        rep.has_closed_form = true;
    }
    return rep;
}

}  // namespace spde
