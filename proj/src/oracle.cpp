#include "spde/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace spde::oracle {

namespace {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

Mat solution_operator(cd lambda, const TimeGrid& grid) {
    if (std::real(lambda) > 0.0)
        throw std::invalid_argument("oracle requires Re(lambda) <= 0");
    if (grid.n_steps < 2 || grid.n_steps > 2048)
        throw std::invalid_argument("oracle grids are capped at 2 <= n <= 2048");
    const int n = grid.n_steps;
    const double dt = grid.dt();
    Mat S = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
            S(i, j) = dt * std::exp(lambda * (static_cast<double>(i - j) * dt));
    return S;
}

}  // namespace

RsNormCheck check_rs_norm(cd lambda, const TimeGrid& grid) {
    const Mat S = solution_operator(lambda, grid);
    const double r_clip = std::max(std::abs(std::real(lambda)), 1.0 / grid.T);
    Eigen::BDCSVD<Mat> svd(r_clip * S);
    RsNormCheck out;
    out.norm = svd.singularValues()(0);
    // First-order quadrature error; the constant absorbs |lambda| dt terms.
    out.bound = 1.0 + 2.0 * (1.0 + std::abs(lambda)) * grid.dt() * grid.T * r_clip;
    out.pass = out.norm <= out.bound;
    return out;
}

double check_perturbation_identity(cd lambda0, cd lambda1, const TimeGrid& grid) {
    const Mat S0 = solution_operator(lambda0, grid);
    const Mat S1 = solution_operator(lambda1, grid);
    const Mat diff = S1 - S0;
    const cd dl = lambda1 - lambda0;
    const double r1 = (diff - dl * (S0 * S1)).cwiseAbs().maxCoeff();
    const double r2 = (diff - dl * (S1 * S0)).cwiseAbs().maxCoeff();
    return std::max(r1, r2);
}

double check_cov_factorization(cd lambda, const TimeGrid& grid) {
    const Mat S = solution_operator(lambda, grid);
    const double dt = grid.dt();
    const Mat C = (S * S.adjoint()) / dt;
    double resid = 0.0;
    for (int i = 0; i < grid.n_steps; ++i)
        for (int j = 0; j < grid.n_steps; ++j) {
            const double t = (i + 1) * dt;
            const double s = (j + 1) * dt;
            resid = std::max(resid, std::abs(C(i, j) - cov_kernel(lambda, t, s)));
        }
    return resid;
}

double matrix_hellinger(cd lambda0, cd lambda1, double b, double eps,
                        const TimeGrid& grid, int mult) {
    if (mult != 1 && mult != 2)
        throw std::invalid_argument("mult must be 1 or 2");
    const int n = grid.n_steps;
    const double dt = grid.dt();
    auto build_q = [&](cd lambda) {
        Mat Q = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                Q(i, j) = b * b * dt * dt *
                          cov_kernel(lambda, (i + 1) * dt, (j + 1) * dt);
        for (int i = 0; i < n; ++i) Q(i, i) += eps * eps * dt;
        return Q;
    };
    const Mat Q0 = build_q(lambda0);
    const Mat Q1 = build_q(lambda1);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Q1, Q0);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("generalized eigensolve failed (singular Q?)");
    // Bhattacharyya coefficient: per real dimension (2 sqrt(tau)/(1+tau))^{1/2};
    // mult = 2 doubles each complex eigendirection.
    double log_bc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double tau = es.eigenvalues()(i);
        if (tau <= 0.0)
            throw std::runtime_error("nonpositive generalized eigenvalue");
        log_bc += mult * 0.5 * std::log(2.0 * std::sqrt(tau) / (1.0 + tau));
    }
    return 2.0 - 2.0 * std::exp(log_bc);
}

}  // namespace spde::oracle
