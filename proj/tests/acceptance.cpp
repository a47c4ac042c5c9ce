// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Tolerances are pinned in code next to each check.
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "spde/estimate.hpp"
#include "spde/harness.hpp"
#include "spde/hellinger.hpp"
#include "spde/information.hpp"
#include "spde/model.hpp"
#include "spde/oracle.hpp"
#include "spde/rng.hpp"
#include "spde/simulate.hpp"

using namespace spde;
using cd = std::complex<double>;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("CRITERION %d: %s%s%s\n", criterion, pass ? "PASS" : "FAIL",
                detail.empty() ? "" : "  -- ", detail.c_str());
    if (!pass) ++g_failures;
}

const char* kExp1 = R"({
  "model":{"family":"ou","sigma":1.0,"eps":0.0,"T":50.0,
           "theta_lo":0.5,"theta_hi":1.5},
  "sweep":{"axis":"T","values":[50,100,200,400]},
  "replicates":200,"theta_true":1.0,
  "grid_rule":{"dt":0.05},
  "master_seed":7
})";

const char* kExp2 = R"({
  "model":{"family":"frac_laplacian","d":1,"rho":1.0,"beta":0.0,
           "base":"weyl","weyl_c":1.0,"K_max":100,"eps":0.1,"T":50.0,
           "theta_lo":0.5,"theta_hi":1.5},
  "sweep":{"axis":"eps","values":[0.05,0.1,0.2,0.4]},
  "replicates":100,"theta_true":1.0,
  "grid_rule":{"dt":0.005},
  "master_seed":11
})";

const char* kExp3 = R"({
  "model":{"family":"source","d":1,"beta":0.0,"base":"weyl","weyl_c":1.0,
           "K_max":100,"nu":0.1,"eps":0.0,"T":100.0,
           "theta_lo":0.5,"theta_hi":1.5},
  "sweep":{"axis":"nu","values":[0.05,0.1,0.2,0.4]},
  "replicates":100,"theta_true":1.0,
  "grid_rule":{"dt":0.01},
  "master_seed":13
})";

struct SweepOutcome {
    ExperimentConfig cfg;
    ExperimentResult res;
};

SweepOutcome run_sweep(const char* json) {
    SweepOutcome out;
    out.cfg = experiment_from_json(json);
    out.res = run_experiment(out.cfg, 0);
    return out;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

bool slope_in(const SweepOutcome& s, double lo, double hi, int criterion) {
    const double slope = s.res.fit.slope;
    const bool ok = !s.res.degenerate_abort && std::isfinite(slope) &&
                    slope >= lo && slope <= hi;
    report(criterion, ok,
           fmt("slope %.3f, window [%.2f, %.2f]", slope, lo, hi));
    return ok;
}

// ---------------------------------------------------------------- criterion 4
void criterion4(const std::vector<const SweepOutcome*>& sweeps) {
    bool ok = true;
    std::string detail;
    double worst_info = 1.0, worst_rmse = 1.0;
    for (const SweepOutcome* s : sweeps) {
        for (std::size_t vi = 0; vi < s->cfg.values.size(); ++vi) {
            ModelDescriptor d = s->cfg.model;
            if (s->cfg.axis == "T") d.T = s->cfg.values[vi];
            else if (s->cfg.axis == "eps") d.eps = s->cfg.values[vi];
            else d.nu = s->cfg.values[vi];
            const SpectralModel model = model_from_descriptor(d);
            const double vn = lower_bound_rate(model);
            const double inv_sqrt_info =
                1.0 / std::sqrt(info_In(model, model.theta_hi));
            const double f = vn / inv_sqrt_info;
            worst_info = std::max(worst_info, std::max(f, 1.0 / f));
            if (f > 8.0 || f < 1.0 / 8.0) ok = false;
            if (vi + 1 == s->cfg.values.size()) {
                const double rr = s->res.rmse[vi] / vn;
                worst_rmse = std::max(worst_rmse, std::max(rr, 1.0 / rr));
                if (!(rr <= 20.0 && rr >= 1.0 / 20.0)) ok = false;
            }
        }
    }
    report(4, ok,
           fmt("max v_n vs I_n^-1/2 factor %.2f (<= 8), max RMSE/v_n factor "
               "%.2f (<= 20)",
               worst_info, worst_rmse));
}

// ---------------------------------------------------------------- criterion 5
void criterion5() {
    bool ok = true;
    double worst = 0.0;
    for (double T : {10.0, 50.0, 250.0}) {
        for (double eps : {0.4, 0.2, 0.1, 0.05}) {
            ModelDescriptor d;
            d.family = "frac_laplacian";
            d.d = 1;
            d.rho = 1.0;
            d.beta = 0.0;
            d.base = "weyl";
            d.weyl_c = 1.0;
            d.K_max = 100;
            d.eps = eps;
            d.T = T;
            d.theta_lo = 0.5;
            d.theta_hi = 1.5;
            const SpectralModel model = model_from_descriptor(d);
            const double vn = lower_bound_rate(model);
            const double delta = std::pow(2.0, -2.5) * vn;
            const double theta_bar = model.theta_hi;
            const HellingerReport rep =
                hellinger_bound_commuting(model, theta_bar - delta, theta_bar);
            worst = std::max(worst, rep.h2_bound);
            if (!(rep.h2_bound <= 1.0)) ok = false;
        }
    }
    report(5, ok, fmt("max H^2 bound %.4f over 12-point (T, eps) grid (<= 1)", worst));
}

// ---------------------------------------------------------------- criterion 6
void criterion6() {
    bool ok = true;
    std::string why;

    // Operator-norm corollary at the documented points.
    {
        const auto a = oracle::check_rs_norm(cd{-1.0, 0.0}, TimeGrid{10.0, 2000});
        const auto b = oracle::check_rs_norm(cd{0.0, 0.0}, TimeGrid{1.0, 512});
        if (!a.pass || a.norm > 1.01) { ok = false; why += "rs_norm(-1);"; }
        if (!b.pass) { ok = false; why += "rs_norm(0);"; }
    }
    // Perturbation identity: the residual must shrink at least first order
    // under dt halving; measured convergence is second order (ratio ~ 4), so
    // the window admits both.
    for (cd l1 : {cd{-2.0, 0.0}, cd{-1.0, 2.0}}) {
        const double r1 =
            oracle::check_perturbation_identity(cd{-1.0, 0.0}, l1, TimeGrid{5.0, 512});
        const double r2 =
            oracle::check_perturbation_identity(cd{-1.0, 0.0}, l1, TimeGrid{5.0, 1024});
        const double ratio = r1 / r2;
        if (!(r2 < 2e-2) || ratio < 1.5 || ratio > 4.5) {
            ok = false;
            why += fmt("perturb ratio %.2f;", ratio);
        }
    }
    if (oracle::check_perturbation_identity(cd{-1.0, 0.0}, cd{-1.0, 0.0},
                                            TimeGrid{5.0, 256}) != 0.0) {
        ok = false;
        why += "perturb(l,l)!=0;";
    }
    // Covariance factorization: residual < C dt and halves with dt.
    for (cd lam : {cd{0.0, 0.0}, cd{-1.0, 0.0}, cd{-1.0, 1.0}}) {
        const double r1 = oracle::check_cov_factorization(lam, TimeGrid{4.0, 256});
        const double r2 = oracle::check_cov_factorization(lam, TimeGrid{4.0, 512});
        const double ratio = r1 / r2;
        if (!(r1 < 4.0 / 256.0 * 4.0) || ratio < 1.5 || ratio > 2.5) {
            ok = false;
            why += fmt("covfact ratio %.2f;", ratio);
        }
    }
    // Discrete Hellinger below the closed-form bound on random single-mode
    // configurations (10% discretization slack).
    rng::Xoshiro256 gen(2718);
    double worst_excess = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double b = 0.5 + 1.5 * gen.uniform();
        const double eps = 0.05 + 0.3 * gen.uniform();
        const double th0 = 0.5 + gen.uniform();
        double th1 = 0.5 + gen.uniform();
        if (th1 == th0) th1 += 0.05;
        SpectralModel model;
        model.theta_lo = 0.4;
        model.theta_hi = 1.6;
        model.eps = eps;
        model.T = 4.0;
        ModeSpec md;
        md.ell = {-1.0, 0.0};
        md.b = b;
        model.modes.push_back(md);
        const double bound = hellinger_bound_commuting(model, th0, th1).h2_bound;
        const double h2 = oracle::matrix_hellinger(cd{-th0, 0.0}, cd{-th1, 0.0}, b,
                                                   eps, TimeGrid{4.0, 256});
        worst_excess = std::max(worst_excess, h2 / bound);
        if (!(h2 <= 1.1 * bound + 1e-6)) {
            ok = false;
            why += fmt("H2 %.3g > bound %.3g;", h2, bound);
        }
        // Symmetry of the discrete H^2.
        const double h2s = oracle::matrix_hellinger(cd{-th1, 0.0}, cd{-th0, 0.0}, b,
                                                    eps, TimeGrid{4.0, 256});
        if (std::abs(h2 - h2s) > 1e-12) { ok = false; why += "asymmetry;"; }
    }
    if (oracle::matrix_hellinger(cd{-1.0, 0.0}, cd{-1.0, 0.0}, 1.0, 0.1,
                                 TimeGrid{4.0, 128}) > 1e-12) {
        ok = false;
        why += "H2(l,l)!=0;";
    }
    report(6, ok, ok ? fmt("max discrete/bound ratio %.3f over 20 random configs",
                           worst_excess)
                     : why);
}

// ---------------------------------------------------------------- criterion 7
void criterion7() {
    bool ok = true;
    rng::Xoshiro256 gen(31415);
    for (int i = 0; i < 10000; ++i) {
        const double s0 = 0.1 + 4.9 * gen.uniform();
        const double s1 = 0.1 + 4.9 * gen.uniform();
        const auto [exact, bound] = hellinger_scalar(s0, s1);
        if (!(exact <= bound + 1e-14)) { ok = false; break; }
    }
    auto bc_quad = [](double s0, double s1) {
        const double L = 12.0 * std::max(s0, s1);
        const int n = 40000;
        const double h = 2.0 * L / n;
        double sum = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double x = -L + i * h;
            const double p0 =
                std::exp(-x * x / (2 * s0 * s0)) / (s0 * std::sqrt(2 * M_PI));
            const double p1 =
                std::exp(-x * x / (2 * s1 * s1)) / (s1 * std::sqrt(2 * M_PI));
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            sum += w * std::sqrt(p0 * p1);
        }
        return 2.0 - 2.0 * sum * h / 3.0;
    };
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double s0 = 0.2 + 2.8 * gen.uniform();
        const double s1 = 0.2 + 2.8 * gen.uniform();
        const auto [exact, bound] = hellinger_scalar(s0, s1);
        (void)bound;
        worst = std::max(worst, std::abs(exact - bc_quad(s0, s1)));
    }
    if (worst > 1e-8) ok = false;
    report(7, ok, fmt("10^4 pairs exact<=bound; max quadrature gap %.2e (<= 1e-8)",
                      worst));
}

// ---------------------------------------------------------------- criterion 8
void criterion8(const SweepOutcome& exp1) {
    bool ok = true;
    std::string why;

    // Noise scaling: doubling (b, eps) with coupled seeds doubles every
    // increment and leaves the estimator untouched bit for bit.
    {
        SpectralModel big = model_ou(2.0, 0.4, 20.0, 0.5, 1.5);
        SpectralModel small = model_ou(1.0, 0.2, 20.0, 0.5, 1.5);
        const TimeGrid grid{20.0, 400};
        const ObservationRecord a = simulate_observations(big, 1.0, grid, 4242);
        const ObservationRecord b = simulate_observations(small, 1.0, grid, 4242);
        bool same = true;
        for (int i = 0; i < grid.n_steps; ++i)
            same = same && a.dY[0][i] == 2.0 * b.dY[0][i];
        const EstimatorResult ea = estimate(big, a);
        const EstimatorResult eb = estimate(small, b);
        if (!same || ea.theta_hat != eb.theta_hat) {
            ok = false;
            why += "noise-scaling;";
        }
    }
    // Scale invariance of the ratio under dY -> 2 dY.
    {
        SpectralModel ou = model_ou(1.0, 0.0, 20.0, 0.5, 1.5);
        const TimeGrid grid{20.0, 400};
        ObservationRecord obs = simulate_observations(ou, 1.0, grid, 17);
        const EstimatorResult e1 = estimate(ou, obs);
        for (auto& v : obs.dY[0]) v *= 2.0;
        const EstimatorResult e2 = estimate(ou, obs);
        if (e1.theta_hat != e2.theta_hat) {
            ok = false;
            why += "scale-invariance;";
        }
    }
    // Thread-count bit invariance on the criterion-1 experiment.
    {
        const ExperimentResult r1 = run_experiment(exp1.cfg, 1);
        const ExperimentResult r8 = run_experiment(exp1.cfg, 8);
        bool same = r1.rows.size() == r8.rows.size();
        for (std::size_t i = 0; same && i < r1.rows.size(); ++i) {
            same = r1.rows[i].seed == r8.rows[i].seed &&
                   r1.rows[i].theta_hat == r8.rows[i].theta_hat &&
                   r1.rows[i].Z == r8.rows[i].Z && r1.rows[i].N == r8.rows[i].N;
        }
        if (!same || r1.fit.slope != r8.fit.slope) {
            ok = false;
            why += "workers 1 vs 8;";
        }
    }
    report(8, ok, why);
}

// ---------------------------------------------------------------- criterion 9
void criterion9() {
    bool ok = true;
    std::string why;
    using Exp = std::map<std::string, double>;
    auto check_par = [&](const char* fam, RateParams p, const std::string& regime,
                         const Exp& expect) {
        const ClosedFormRate r = parametric_rate(fam, p);
        if (r.regime != regime) {
            ok = false;
            why += fmt("", 0) + fam + " regime " + r.regime + "!=" + regime + ";";
            return;
        }
        for (const auto& [axis, e] : expect) {
            const auto it = r.exponents.find(axis);
            if (it == r.exponents.end() || std::abs(it->second - e) > 1e-12) {
                ok = false;
                why += std::string(fam) + " " + axis + ";";
            }
        }
    };
    RateParams p;

    // Scalar family: four regime combinations.
    p = {};
    p.T = 100.0; p.eps = 0.01; p.sigma = 1.0; p.theta_bar = 1.0;
    check_par("ou", p, "ergodic|noise-free",
              {{"T", -0.5}, {"eps", 0.0}, {"theta_bar", 0.5}, {"sigma", 0.0}});
    p.eps = 1.0; p.sigma = 0.5;
    check_par("ou", p, "ergodic|noise-dominated",
              {{"T", -0.5}, {"eps", 2.0}, {"theta_bar", 2.5}, {"sigma", -2.0}});
    p = {};
    p.T = 100.0; p.theta_bar = 1e-4; p.eps = 0.0;
    check_par("ou", p, "null-recurrent|noise-free", {{"T", -1.0}, {"eps", 0.0}});
    p.eps = 1.0; p.sigma = 1e-5;
    check_par("ou", p, "null-recurrent|noise-dominated",
              {{"T", -1.0}, {"eps", 2.0}, {"sigma", -2.0}});

    // Fractional diffusivity: eps exponent (2 rho + d)/(4 rho (1 + beta)).
    for (auto [d, rho, beta] :
         {std::tuple{1, 1.0, 0.0}, {2, 1.0, 0.5}, {3, 2.0, 0.0}}) {
        p = {};
        p.d = d; p.rho = rho; p.beta = beta; p.T = 100.0; p.eps = 0.01;
        check_par("frac_laplacian", p, "standard",
                  {{"T", -0.5},
                   {"eps", (2.0 * rho + d) / (4.0 * rho * (1.0 + beta))}});
    }
    p = {};
    p.d = 6; p.rho = 1.0; p.beta = 0.0;
    if (parametric_rate("frac_laplacian", p).regime != "identifiable") {
        ok = false;
        why += "frac identifiable;";
    }

    // Transport: both branches of the case split, including the boundary
    // (nu == eps^{1/(1+2 beta)} falls in the nu-dominant branch).
    for (int d : {1, 2, 3}) {
        for (double beta : {0.0, 0.5}) {
            p = {};
            p.d = d; p.beta = beta; p.T = 100.0; p.eps = 0.01; p.nu = 0.5;
            check_par("transport", p, "nu-dominant",
                      {{"T", -0.5},
                       {"nu", (2.0 + d + 2.0 * beta) / (4.0 + 4.0 * beta)},
                       {"eps", d / (4.0 + 4.0 * beta)}});
            p.nu = 1e-5;
            check_par("transport", p, "eps-dominant",
                      {{"T", -0.5},
                       {"nu", (5.0 + d + 8.0 * beta) / (10.0 + 16.0 * beta)},
                       {"eps", 2.0 * d / (5.0 + 8.0 * beta)}});
            p.nu = std::pow(p.eps, 1.0 / (1.0 + 2.0 * beta));
            if (parametric_rate("transport", p).regime != "nu-dominant") {
                ok = false;
                why += "transport boundary;";
            }
        }
    }
    p = {};
    p.d = 8; p.beta = 0.0;
    if (parametric_rate("transport", p).regime != "identifiable") {
        ok = false;
        why += "transport identifiable;";
    }

    // Source: the three dimension cases plus the identifiability cap.
    p = {};
    p.T = 100.0; p.eps = 0.01; p.nu = 0.1;
    p.d = 1;
    check_par("source", p, "d=1", {{"T", -0.5}, {"nu", 0.25}});
    p.d = 2;
    check_par("source", p, "d=2 (log factor)", {{"T", -0.5}, {"nu", 0.5}});
    for (int d : {3, 5}) {
        p.d = d;
        check_par("source", p, "d>=3",
                  {{"T", -0.5}, {"nu", d / 4.0}, {"eps", (d - 2.0) / 4.0}});
    }
    p.d = 10;
    if (parametric_rate("source", p).regime != "identifiable") {
        ok = false;
        why += "source identifiable;";
    }

    // Nonparametric tables: exponents on both sides of each ellbow.
    auto check_np = [&](const char* fam, double alpha, int d, double beta,
                        double T, double eps, double nu,
                        const std::string& regime, const Exp& expect) {
        const ClosedFormRate r = nonparametric_rate(fam, alpha, d, beta, T, eps, nu);
        if (r.regime != regime) {
            ok = false;
            why += std::string(fam) + " np regime " + r.regime + "!=" + regime + ";";
            return;
        }
        for (const auto& [axis, e] : expect) {
            const auto it = r.exponents.find(axis);
            if (it == r.exponents.end() || std::abs(it->second - e) > 1e-12) {
                ok = false;
                why += std::string(fam) + " np " + axis + ";";
            }
        }
    };
    // Diffusivity: threshold T* = eps^{(1-alpha)/(1+beta)} = 10 at alpha=2,
    // beta=0, eps=0.1; the boundary itself sits in the parametric branch.
    check_np("diffusivity", 2.0, 1, 0.0, 9.9, 0.1, 1.0, "parametric-scaling",
             {{"T", -2.0 / 5.0}, {"eps", (2.0 / 5.0) * 1.5}});
    check_np("diffusivity", 2.0, 1, 0.0, 10.1, 0.1, 1.0,
             "large-T-ellbow", {{"T", -2.0 / 7.0}, {"eps", (2.0 / 7.0) * 2.5}});
    // Transport: threshold T* = eps^-alpha nu^{1-alpha} = 100 at alpha=1,
    // eps=0.01.
    check_np("transport", 1.0, 2, 0.0, 99.0, 0.01, 0.3, "parametric-scaling",
             {{"T", -0.25}, {"eps", 0.25}, {"nu", 0.5}});
    check_np("transport", 1.0, 2, 0.0, 101.0, 0.01, 0.3,
             "large-T-ellbow",
             {{"T", -1.0 / 7.0}, {"eps", 5.0 / 14.0}, {"nu", 7.0 / 14.0}});
    // Source: all three regimes.
    check_np("source", 0.5, 1, 0.0, 100.0, 1e-3, 1e-4, "parametric-scaling",
             {{"T", -0.25}, {"nu", 0.125}, {"eps", 0.0}});
    check_np("source", 2.0, 2, 0.0, 1e8, 0.9, 0.9, "ellbow-low-d",
             {{"T", -0.2}, {"nu", 0.6}, {"eps", 0.4}});
    check_np("source", 2.0, 5, 0.0, 1e8, 0.9, 0.9, "ellbow-high-d",
             {{"T", -2.0 / 11.0}, {"nu", 7.0 / 11.0}, {"eps", 5.0 / 11.0}});

    report(9, ok, why);
}

// --------------------------------------------------------------- criterion 10
void criterion10() {
    bool ok = true;
    int cases = 0;
    for (double m : {2.0, 4.0, 6.0}) {
        for (double m1 : {0.0, 0.5, 1.0, 1.5, 2.0}) {
            for (int d : {1, 2}) {
                ++cases;
                const EquivalenceSeries s =
                    equivalence_series(m, m1, d, 0.1, 10.0, 1000);
                const bool expect = m1 < (m - d) / 2.0;
                if (s.equivalent != expect) ok = false;
                // Partial-sum growth as an independent signal: convergent
                // series barely move when K doubles, divergent ones keep
                // accumulating.
                const EquivalenceSeries s2 =
                    equivalence_series(m, m1, d, 0.1, 10.0, 2000);
                const double rel =
                    (s2.partial_sum - s.partial_sum) / s.partial_sum;
                if (s.exponent < -1.2 && rel > 0.05) ok = false;
                if (s.exponent > -0.8 && rel < 0.05) ok = false;
            }
        }
    }
    report(10, ok, fmt("%g cases, verdict == (m1 < (m-d)/2)",
                       static_cast<double>(cases)));
}

}  // namespace

int main() {
    const SweepOutcome e1 = run_sweep(kExp1);
    slope_in(e1, -0.65, -0.35, 1);
    const SweepOutcome e2 = run_sweep(kExp2);
    slope_in(e2, 0.60, 0.90, 2);
    const SweepOutcome e3 = run_sweep(kExp3);
    slope_in(e3, 0.15, 0.35, 3);
    criterion4({&e1, &e2, &e3});
    criterion5();
    criterion6();
    criterion7();
    criterion8(e1);
    criterion9();
    criterion10();
    if (g_failures > 0) {
        std::printf("ACCEPTANCE: %d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("ACCEPTANCE: all criteria passed\n");
    return 0;
}
