#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "spde/estimate.hpp"
#include "spde/harness.hpp"
#include "spde/hellinger.hpp"
#include "spde/model.hpp"
#include "spde/simulate.hpp"

using namespace spde;
using cd = std::complex<double>;

namespace {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGlX[8] = {-0.9602898564975363, -0.7966664774136267,
                            -0.5255324099163290, -0.1834346424956498,
                            0.1834346424956498,  0.5255324099163290,
                            0.7966664774136267,  0.9602898564975363};
constexpr double kGlW[8] = {0.1012285362903763, 0.2223810344533745,
                            0.3137066458778873, 0.3626837833783620,
                            0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};

// int over cell_i x cell_j of cov_kernel, cells [(i-1)dt, i dt] (1-based).
cd cell_cov(cd lambda, int i, int j, double dt) {
    cd sum{0.0, 0.0};
    const double ti0 = (i - 1) * dt, tj0 = (j - 1) * dt;
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
            const double t = ti0 + 0.5 * dt * (1.0 + kGlX[a]);
            const double s = tj0 + 0.5 * dt * (1.0 + kGlX[b]);
            sum += kGlW[a] * kGlW[b] * cov_kernel(lambda, t, s);
        }
    return sum * (0.25 * dt * dt);
}

}  // namespace

TEST_CASE("terminal state variance matches the closed-form kernel") {
    // The recursion is distributionally exact, so x(T) is Gaussian with
    // variance cov_kernel(lambda, T, T) at any step size.
    SpectralModel ou = model_ou(1.0, 0.0, 10.0, 0.5, 1.5);
    const TimeGrid grid{10.0, 100};
    const int R = 4000;
    std::vector<ObservationRecord> recs;
    recs.reserve(R);
    double sq = 0.0;
    for (int r = 0; r < R; ++r) {
        recs.push_back(simulate_observations(ou, 1.0, grid, 2024, true, r));
        const cd xT = recs.back().state[0][grid.n_steps];
        sq += std::norm(xT);
    }
    const double var_emp = sq / R;
    const double var_th = cov_kernel(cd{-1.0, 0.0}, 10.0, 10.0).real();
    // Sample variance of a Gaussian: sd ~ var * sqrt(2/R).
    const double tol = 4.0 * var_th * std::sqrt(2.0 / R);
    CHECK(var_emp == doctest::Approx(var_th).epsilon(tol / var_th));

    // Two-time covariance through the empirical helper, 4 standard errors.
    const EmpiricalCov ec =
        empirical_mode_covariance(recs, 0, grid.n_steps, grid.n_steps / 2);
    const cd th = cov_kernel(cd{-1.0, 0.0}, 10.0, 5.0);
    CHECK(std::abs(ec.mean - th) <= 4.0 * ec.std_error);
}

TEST_CASE("complex-mode state covariance matches the kernel") {
    // Transport mode: lambda has a rotation part, the state is complex.
    SpectralModel tr = model_transport(1, 0.05, {1.0}, 0.0, 1, 0.0, 5.0, 0.5, 1.5);
    REQUIRE(tr.modes.size() == 2);
    REQUIRE(tr.modes[1].mult == 2);
    const TimeGrid grid{5.0, 100};
    const double theta = 1.0;
    const cd lambda = tr.modes[1].m + theta * tr.modes[1].ell;
    const int R = 3000;
    std::vector<ObservationRecord> recs;
    recs.reserve(R);
    for (int r = 0; r < R; ++r)
        recs.push_back(simulate_observations(tr, theta, grid, 77, true, r));
    const EmpiricalCov ec = empirical_mode_covariance(recs, 1, 100, 60);
    const cd th = cov_kernel(lambda, 5.0, 3.0);
    CHECK(std::abs(ec.mean - th) <= 4.0 * ec.std_error);
}

TEST_CASE("integrated Brownian motion variance") {
    // theta = 0 freezes the OU mode to a Brownian motion; the summed record is
    // b * int_0^T B, whose variance is T^3/3.
    SpectralModel ou = model_ou(1.0, 0.0, 4.0, 0.0, 1.0);
    const TimeGrid grid{4.0, 64};
    const int R = 3000;
    double sq = 0.0;
    for (int r = 0; r < R; ++r) {
        const ObservationRecord rec = simulate_observations(ou, 0.0, grid, 5150, false, r);
        cd y{0.0, 0.0};
        for (const cd& v : rec.dY[0]) y += v;
        sq += std::norm(y);
    }
    const double var_emp = sq / R;
    const double var_th = 4.0 * 4.0 * 4.0 / 3.0;
    const double tol = 4.0 * var_th * std::sqrt(2.0 / R);
    CHECK(std::abs(var_emp - var_th) <= tol);
}

TEST_CASE("increment covariance matches the cell-integrated kernel") {
    // E[dY_j dY_i] = b^2 int int cov + eps^2 dt delta_ij, checked against
    // Gauss-Legendre cell integrals at a few (i, j).
    SpectralModel ou = model_ou(1.0, 0.2, 2.0, 0.5, 1.5);
    const TimeGrid grid{2.0, 8};
    const double dt = grid.dt();
    const cd lambda{-0.8, 0.0};
    const int R = 50000;
    struct Pair { int i, j; };
    const Pair pairs[] = {{5, 2}, {3, 3}, {8, 1}};
    double sum[3] = {0, 0, 0}, sum2[3] = {0, 0, 0};
    for (int r = 0; r < R; ++r) {
        const ObservationRecord rec = simulate_observations(ou, 0.8, grid, 31337, false, r);
        for (int p = 0; p < 3; ++p) {
            const double prod = std::real(std::conj(rec.dY[0][pairs[p].j - 1]) *
                                          rec.dY[0][pairs[p].i - 1]);
            sum[p] += prod;
            sum2[p] += prod * prod;
        }
    }
    for (int p = 0; p < 3; ++p) {
        const double mean = sum[p] / R;
        const double se = std::sqrt(std::max(0.0, sum2[p] / R - mean * mean) / R);
        double expect = cell_cov(lambda, pairs[p].i, pairs[p].j, dt).real();
        if (pairs[p].i == pairs[p].j) expect += 0.2 * 0.2 * dt;
        CHECK(std::abs(mean - expect) <= 5.0 * se + 1e-12);
    }
}

TEST_CASE("noise scaling invariance") {
    // Scaling (b, eps) by 2 scales every increment by exactly 2 and leaves
    // the estimator invariant bit for bit (the kernel weights absorb 2^4).
    const TimeGrid grid{10.0, 400};
    SUBCASE("with observation noise") {
        SpectralModel big = model_ou(2.0, 0.4, 10.0, 0.5, 1.5);
        SpectralModel small = model_ou(1.0, 0.2, 10.0, 0.5, 1.5);
        const ObservationRecord a = simulate_observations(big, 1.0, grid, 42);
        const ObservationRecord b = simulate_observations(small, 1.0, grid, 42);
        for (int i = 0; i < grid.n_steps; ++i) CHECK(a.dY[0][i] == 2.0 * b.dY[0][i]);
        const EstimatorResult ea = estimate(big, a);
        const EstimatorResult eb = estimate(small, b);
        CHECK(ea.theta_hat == eb.theta_hat);
    }
    SUBCASE("noise free") {
        SpectralModel big = model_ou(2.0, 0.0, 10.0, 0.5, 1.5);
        SpectralModel small = model_ou(1.0, 0.0, 10.0, 0.5, 1.5);
        const ObservationRecord a = simulate_observations(big, 1.0, grid, 9);
        const ObservationRecord b = simulate_observations(small, 1.0, grid, 9);
        const EstimatorResult ea = estimate(big, a);
        const EstimatorResult eb = estimate(small, b);
        // kappa ~ b^-2 cancels the b^2 in each increment product, so the
        // sums themselves are invariant, not just their ratio.
        CHECK(ea.Z == eb.Z);
        CHECK(ea.N == eb.N);
        CHECK(ea.theta_hat == eb.theta_hat);
    }
}

TEST_CASE("grid refinement coupling") {
    // Summing adjacent fine increments reconstructs the coarse record of the
    // same path, so the two estimates differ only by discretization.
    SpectralModel ou = model_ou(1.0, 0.0, 50.0, 0.5, 1.5);
    for (std::uint64_t rep : {0ULL, 1ULL, 2ULL}) {
        const TimeGrid fine{50.0, 2000};
        const ObservationRecord obs_f =
            simulate_observations(ou, 1.0, fine, 1234, false, rep);
        ObservationRecord obs_c;
        obs_c.theta_true = 1.0;
        obs_c.grid = TimeGrid{50.0, 1000};
        obs_c.seed = obs_f.seed;
        obs_c.dY.resize(1);
        obs_c.dY[0].resize(1000);
        for (int i = 0; i < 1000; ++i)
            obs_c.dY[0][i] = obs_f.dY[0][2 * i] + obs_f.dY[0][2 * i + 1];
        const EstimatorResult ef = estimate(ou, obs_f);
        const EstimatorResult ec = estimate(ou, obs_c);
        CHECK_FALSE(ef.degenerate);
        CHECK_FALSE(ec.degenerate);
        CHECK(std::abs(ef.theta_hat - ec.theta_hat) < 0.15);
    }
}

TEST_CASE("estimator consistency on the OU model") {
    SpectralModel ou = model_ou(1.0, 0.0, 200.0, 0.5, 1.5);
    const TimeGrid grid{200.0, 4000};
    const int R = 200;
    int in_range = 0;
    for (int r = 0; r < R; ++r) {
        const ObservationRecord obs = simulate_observations(ou, 1.0, grid, 8, false, r);
        const EstimatorResult est = estimate(ou, obs);
        if (!est.degenerate && est.theta_hat >= 0.5 && est.theta_hat <= 1.5)
            ++in_range;
    }
    CHECK(in_range >= 190);
}

TEST_CASE("error decreases with the horizon") {
    const char* cfg_json = R"({
      "model": {"family":"ou","sigma":1.0,"eps":0.0,"T":100.0,
                "theta_lo":0.5,"theta_hi":1.5},
      "sweep": {"axis":"T","values":[100, 400]},
      "replicates": 100,
      "theta_true": 1.0,
      "grid_rule": {"dt": 0.05},
      "master_seed": 21
    })";
    const ExperimentConfig cfg = experiment_from_json(cfg_json);
    const ExperimentResult res = run_experiment(cfg, 0);
    REQUIRE(res.rmse.size() == 2);
    CHECK_FALSE(res.degenerate_abort);
    CHECK(res.rmse[1] < res.rmse[0]);
    CHECK(res.fit.slope < 0.0);
}

TEST_CASE("scalar hellinger against quadrature") {
    // 2 - 2 int sqrt(p0 p1) via Simpson on a wide window.
    auto bc_quad = [](double s0, double s1) {
        const double L = 12.0 * std::max(s0, s1);
        const int n = 20000;
        const double h = 2.0 * L / n;
        double sum = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double x = -L + i * h;
            const double p0 = std::exp(-x * x / (2 * s0 * s0)) /
                              (s0 * std::sqrt(2 * M_PI));
            const double p1 = std::exp(-x * x / (2 * s1 * s1)) /
                              (s1 * std::sqrt(2 * M_PI));
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            sum += w * std::sqrt(p0 * p1);
        }
        return 2.0 - 2.0 * sum * h / 3.0;
    };
    for (auto [s0, s1] : {std::pair{1.0, 2.0}, {0.7, 1.3}, {2.0, 2.5}}) {
        const auto [exact, bound] = hellinger_scalar(s0, s1);
        CHECK(exact == doctest::Approx(bc_quad(s0, s1)).epsilon(1e-8));
        CHECK(exact <= bound + 1e-15);
    }
}
