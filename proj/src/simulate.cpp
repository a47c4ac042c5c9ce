#include "spde/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "spde/rng.hpp"

namespace spde {

namespace {

using cd = std::complex<double>;

// (e^z - 1)/z, series below |z| = 0.5 to avoid cancellation.
cd phi1(cd z) {
    if (std::abs(z) >= 0.5) return (std::exp(z) - 1.0) / z;
    cd term{1.0, 0.0};
    cd sum{1.0, 0.0};
    for (int k = 1; k < 32; ++k) {
        term *= z / static_cast<double>(k + 1);
        sum += term;
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

double phi1_real(double x) { return std::real(phi1(cd{x, 0.0})); }

}  // namespace

StepMoments step_moments(cd lambda, double dt) {
    if (std::real(lambda) > 0.0)
        throw std::invalid_argument("step_moments requires Re(lambda) <= 0");
    if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");
    const double r = std::real(lambda);
    const cd z = lambda * dt;

    StepMoments sm;
    sm.exp_l = std::exp(z);
    sm.phi = dt * phi1(z);
    sm.var_x = dt * phi1_real(2.0 * r * dt);

    if (std::abs(z) >= 0.5) {
        // Closed forms are stable away from lambda*dt -> 0.
        const double e2 = dt * phi1_real(2.0 * r * dt);       // int_0^dt e^{2ru} du
        const cd e1 = sm.phi;                                  // int_0^dt e^{lambda u} du
        const double a2 = std::norm(lambda);
        sm.var_i = (e2 - 2.0 * std::real(e1) + dt) / a2;
        sm.cov_xi = (e2 - e1) / std::conj(lambda);
    } else {
        // Power series in lambda*dt; both integrals expand in u-polynomials
        // with coefficients built from lambda^k conj(lambda)^{n-k}.
        const cd lc = std::conj(lambda);
        // var_i = int_0^dt u^2 phi1(lambda u) phi1(conj(lambda) u) du
        // cov_xi = int_0^dt u e^{lambda u} phi1(conj(lambda) u) du
        double var_i = 0.0;
        cd cov{0.0, 0.0};
        // factorials up to 21!
        double fact[22];
        fact[0] = 1.0;
        for (int i = 1; i < 22; ++i) fact[i] = fact[i - 1] * i;
        cd lp[21], lcp[21];
        lp[0] = lcp[0] = cd{1.0, 0.0};
        for (int i = 1; i < 21; ++i) {
            lp[i] = lp[i - 1] * lambda;
            lcp[i] = lcp[i - 1] * lc;
        }
        double dt_pow3 = dt * dt * dt;  // dt^{n+3} running power
        double dt_pow2 = dt * dt;       // dt^{n+2}
        for (int n = 0; n < 20; ++n) {
            cd cn{0.0, 0.0}, dn{0.0, 0.0};
            for (int k = 0; k <= n; ++k) {
                cn += lp[k] * lcp[n - k] / (fact[k + 1] * fact[n - k + 1]);
                dn += lp[k] * lcp[n - k] / (fact[k] * fact[n - k + 1]);
            }
            var_i += std::real(cn) * dt_pow3 / (n + 3);
            cov += dn * (dt_pow2 / (n + 2));
            dt_pow3 *= dt;
            dt_pow2 *= dt;
        }
        sm.var_i = var_i;
        sm.cov_xi = cov;
    }
    if (sm.var_i < 0.0) sm.var_i = 0.0;
    return sm;
}

ObservationRecord simulate_observations(const SpectralModel& model, double theta,
                                        const TimeGrid& grid, std::uint64_t seed,
                                        bool retain_state, std::uint64_t replicate) {
    model.validate();
    if (grid.n_steps < 1 || grid.T <= 0.0)
        throw std::invalid_argument("invalid time grid");
    const auto lambdas = assemble_lambda(model, theta);
    const double dt = grid.dt();
    const double sdt = std::sqrt(dt);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    ObservationRecord rec;
    rec.theta_true = theta;
    rec.grid = grid;
    rec.seed = seed;
    rec.replicate = replicate;
    rec.dY.resize(model.modes.size());
    if (retain_state) rec.state.resize(model.modes.size());

    for (std::size_t k = 0; k < model.modes.size(); ++k) {
        const ModeSpec& md = model.modes[k];
        const cd lambda = lambdas[k].lambda;
        const StepMoments sm = step_moments(lambda, dt);
        // Cholesky factor of the 2x2 innovation covariance.
        const double l11 = std::sqrt(sm.var_x);
        const cd l21 = l11 > 0.0 ? std::conj(sm.cov_xi) / l11 : cd{0.0, 0.0};
        const double l22 =
            std::sqrt(std::max(0.0, sm.var_i - std::norm(l21)));

        rng::NormalStream ns(rng::stream_key(seed, replicate, k));
        auto& dy = rec.dY[k];
        dy.resize(grid.n_steps);
        std::vector<cd>* st = nullptr;
        if (retain_state) {
            st = &rec.state[k];
            st->reserve(grid.n_steps + 1);
            st->push_back(cd{0.0, 0.0});
        }

        cd x{0.0, 0.0};
        const bool complex_mode = md.mult == 2;
        for (int i = 0; i < grid.n_steps; ++i) {
            cd g1, g2, zeta;
            if (complex_mode) {
                g1 = cd{ns.next(), ns.next()} * inv_sqrt2;
                g2 = cd{ns.next(), ns.next()} * inv_sqrt2;
                zeta = cd{ns.next(), ns.next()} * (sdt * inv_sqrt2);
            } else {
                g1 = cd{ns.next(), 0.0};
                g2 = cd{ns.next(), 0.0};
                zeta = cd{ns.next() * sdt, 0.0};
            }
            const cd xi = l11 * g1;
            const cd eta = l21 * g1 + l22 * g2;
            const cd integral = sm.phi * x + eta;
            x = sm.exp_l * x + xi;
            dy[i] = md.b * integral + model.eps * zeta;
            if (st) st->push_back(x);
        }
    }
    return rec;
}

cd cov_kernel(cd lambda, double t, double s) {
    if (std::real(lambda) > 0.0)
        throw std::invalid_argument("cov_kernel requires Re(lambda) <= 0");
    const double r = std::real(lambda);
    const double j = std::imag(lambda);
    const double tmin = std::min(t, s);
    const double diff = std::abs(t - s);
    // (e^{r(t+s)} - e^{r|t-s|})/(2r) = e^{r|t-s|} * expm1(2 r min(t,s))/(2r)
    double radial;
    if (r == 0.0) {
        radial = tmin;
    } else {
        radial = std::exp(r * diff) * std::expm1(2.0 * r * tmin) / (2.0 * r);
    }
    const double phase = j * (t - s);
    return radial * cd{std::cos(phase), std::sin(phase)};
}

EmpiricalCov empirical_mode_covariance(const std::vector<ObservationRecord>& records,
                                       std::size_t k, int t_idx, int s_idx) {
    if (records.size() < 100)
        throw std::invalid_argument("need at least 100 replicates");
    const TimeGrid& g0 = records.front().grid;
    cd sum{0.0, 0.0};
    double sum_re2 = 0.0, sum_im2 = 0.0;
    for (const auto& rec : records) {
        if (rec.grid.n_steps != g0.n_steps || rec.grid.T != g0.T ||
            rec.theta_true != records.front().theta_true)
            throw std::invalid_argument("records disagree on grid or theta");
        if (!rec.has_state())
            throw std::invalid_argument("state paths were not retained");
        if (k >= rec.state.size() || t_idx > g0.n_steps || s_idx > g0.n_steps)
            throw std::invalid_argument("index out of range");
        const cd v = rec.state[k][t_idx] * std::conj(rec.state[k][s_idx]);
        sum += v;
        sum_re2 += std::real(v) * std::real(v);
        sum_im2 += std::imag(v) * std::imag(v);
    }
    const double n = static_cast<double>(records.size());
    EmpiricalCov out;
    out.mean = sum / n;
    const double var_re = sum_re2 / n - std::real(out.mean) * std::real(out.mean);
    const double var_im = sum_im2 / n - std::imag(out.mean) * std::imag(out.mean);
    out.std_error = std::sqrt(std::max(0.0, var_re + var_im) / n);
    return out;
}

namespace {
constexpr char kMagic[8] = {'S', 'P', 'D', 'E', 'R', 'E', 'C', '1'};
}

void record_save(const ObservationRecord& rec, const std::string& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const std::uint32_t n_modes = static_cast<std::uint32_t>(rec.dY.size());
    const std::uint32_t n_steps = static_cast<std::uint32_t>(rec.grid.n_steps);
    if (binary) {
        out.write(kMagic, 8);
        auto w = [&out](const void* p, std::size_t n) {
            out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        };
        w(&rec.seed, 8);
        w(&rec.replicate, 8);
        w(&n_modes, 4);
        w(&n_steps, 4);
        w(&rec.grid.T, 8);
        w(&rec.theta_true, 8);
        const std::uint8_t has_state = rec.has_state() ? 1 : 0;
        w(&has_state, 1);
        for (const auto& mode : rec.dY)
            for (const cd& v : mode) {
                const double re = std::real(v), im = std::imag(v);
                w(&re, 8);
                w(&im, 8);
            }
        if (has_state)
            for (const auto& mode : rec.state)
                for (const cd& v : mode) {
                    const double re = std::real(v), im = std::imag(v);
                    w(&re, 8);
                    w(&im, 8);
                }
    } else {
        out.precision(17);
        out << "# spde-record v1\n";
        out << "# seed=" << rec.seed << " replicate=" << rec.replicate
            << " n_modes=" << n_modes << " n_steps=" << n_steps
            << " T=" << rec.grid.T << " theta=" << rec.theta_true
            << " rng=" << rec.rng_algo << "\n";
        out << "mode,step,dy_re,dy_im\n";
        for (std::uint32_t k = 0; k < n_modes; ++k)
            for (std::uint32_t i = 0; i < n_steps; ++i)
                out << k << ',' << (i + 1) << ',' << std::real(rec.dY[k][i]) << ','
                    << std::imag(rec.dY[k][i]) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

ObservationRecord record_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    ObservationRecord rec;
    if (in && std::memcmp(magic, kMagic, 8) == 0) {
        auto r = [&in](void* p, std::size_t n) {
            in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        };
        std::uint32_t n_modes = 0, n_steps = 0;
        std::uint8_t has_state = 0;
        r(&rec.seed, 8);
        r(&rec.replicate, 8);
        r(&n_modes, 4);
        r(&n_steps, 4);
        r(&rec.grid.T, 8);
        r(&rec.theta_true, 8);
        r(&has_state, 1);
        rec.grid.n_steps = static_cast<int>(n_steps);
        rec.dY.assign(n_modes, std::vector<cd>(n_steps));
        for (auto& mode : rec.dY)
            for (cd& v : mode) {
                double re = 0, im = 0;
                r(&re, 8);
                r(&im, 8);
                v = cd{re, im};
            }
        if (has_state) {
            rec.state.assign(n_modes, std::vector<cd>(n_steps + 1));
            for (auto& mode : rec.state)
                for (cd& v : mode) {
                    double re = 0, im = 0;
                    r(&re, 8);
                    r(&im, 8);
                    v = cd{re, im};
                }
        }
        if (!in) throw std::runtime_error("truncated record file " + path);
        return rec;
    }
    // CSV fallback.
    in.clear();
    in.seekg(0);
    std::string line;
    std::uint32_t n_modes = 0, n_steps = 0;
    while (std::getline(in, line)) {
        if (line.rfind("# seed=", 0) == 0) {
            std::sscanf(line.c_str(),
                        "# seed=%llu replicate=%llu n_modes=%u n_steps=%u T=%lf theta=%lf",
                        reinterpret_cast<unsigned long long*>(&rec.seed),
                        reinterpret_cast<unsigned long long*>(&rec.replicate), &n_modes,
                        &n_steps, &rec.grid.T, &rec.theta_true);
        } else if (line.rfind("mode,", 0) == 0) {
            break;
        }
    }
    if (n_modes == 0 || n_steps == 0)
        throw std::runtime_error("unrecognized record format in " + path);
    rec.grid.n_steps = static_cast<int>(n_steps);
    rec.dY.assign(n_modes, std::vector<cd>(n_steps));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::uint32_t k = 0, i = 0;
        double re = 0, im = 0;
        if (std::sscanf(line.c_str(), "%u,%u,%lf,%lf", &k, &i, &re, &im) == 4 &&
            k < n_modes && i >= 1 && i <= n_steps)
            rec.dY[k][i - 1] = cd{re, im};
    }
    return rec;
}

}  // namespace spde
