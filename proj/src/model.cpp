#include "spde/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace spde {

namespace {

constexpr double kTwoPiSq = 4.0 * M_PI * M_PI;

std::string lattice_label(const std::vector<int>& l) {
    std::ostringstream os;
    for (std::size_t i = 0; i < l.size(); ++i) {
        if (i) os << ',';
        os << l[i];
    }
    return os.str();
}

struct LatticePoint {
    std::vector<int> l;
    double norm2;
    int mult;
};

// Conjugate-pair representatives l in Z^d with |l| <= K: keep l = 0 and the
// member of each pair {l, -l} whose first nonzero coordinate is positive.
std::vector<LatticePoint> lattice_reps(int d, int K, std::size_t budget) {
    if (d < 1 || d > 3) throw std::invalid_argument("lattice dimension must be 1, 2 or 3");
    if (K < 0) throw std::invalid_argument("K_lattice must be >= 0");
    std::vector<LatticePoint> out;
    const double K2 = static_cast<double>(K) * K;
    std::vector<int> l(d, -K);
    const auto is_canonical = [](const std::vector<int>& v) {
        for (int c : v) {
            if (c > 0) return true;
            if (c < 0) return false;
        }
        return true;  // zero vector
    };
    // Plain nested enumeration over the cube [-K, K]^d.
    const int side = 2 * K + 1;
    const long long total = [&] {
        long long t = 1;
        for (int i = 0; i < d; ++i) t *= side;
        return t;
    }();
    for (long long it = 0; it < total; ++it) {
        long long rest = it;
        double n2 = 0.0;
        for (int i = 0; i < d; ++i) {
            l[i] = static_cast<int>(rest % side) - K;
            rest /= side;
            n2 += static_cast<double>(l[i]) * l[i];
        }
        if (n2 > K2) continue;
        if (!is_canonical(l)) continue;
        bool zero = std::all_of(l.begin(), l.end(), [](int c) { return c == 0; });
        out.push_back({l, n2, zero ? 1 : 2});
        if (out.size() > budget)
            throw std::invalid_argument("K_lattice exceeds the configured mode budget");
    }
    std::sort(out.begin(), out.end(), [](const LatticePoint& a, const LatticePoint& b) {
        if (a.norm2 != b.norm2) return a.norm2 < b.norm2;
        return a.l < b.l;
    });
    return out;
}

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void check_common_fields(double eps, double T, double theta_lo, double theta_hi) {
    require(eps >= 0.0 && eps <= 1.0, "eps must lie in [0,1]");
    require(T >= 1.0, "horizon T must be >= 1");
    require(theta_hi > theta_lo, "theta_hi must exceed theta_lo");
}

}  // namespace

void SpectralModel::validate() const {
    require(theta_hi > theta_lo, "theta_hi must exceed theta_lo");
    require(eps >= 0.0 && eps <= 1.0, "eps must lie in [0,1]");
    require(T >= 1.0, "horizon T must be >= 1");
    require(dim >= 1, "dim must be >= 1");
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const ModeSpec& md = modes[k];
        if (md.b <= 0.0)
            throw std::invalid_argument("mode " + std::to_string(k) + ": b must be > 0");
        if (md.mult != 1 && md.mult != 2)
            throw std::invalid_argument("mode " + std::to_string(k) + ": mult must be 1 or 2");
        if (std::real(md.ell) > 0.0)
            throw std::invalid_argument("mode " + std::to_string(k) + ": Re(ell) must be <= 0");
        // Contractivity over the whole parameter interval; lambda is affine in
        // theta, so the endpoints suffice.
        for (double th : {theta_lo, theta_hi}) {
            const double r = md.m + th * std::real(md.ell);
            if (r > 0.0)
                throw std::invalid_argument("mode " + std::to_string(k) +
                                            ": Re(lambda(theta)) > 0 at theta=" +
                                            std::to_string(th));
        }
        const std::complex<double> lam_bar = md.m + theta_hi * md.ell;
        if (std::abs(std::imag(lam_bar)) > domC * (1.0 + std::abs(std::real(lam_bar))))
            throw std::invalid_argument("mode " + std::to_string(k) +
                                        ": domain condition |Im| <= C(1+|Re|) violated");
    }
}

std::vector<ModeSpec> eigs_torus_laplacian(int d, double nu, int K_lattice,
                                           std::size_t mode_budget) {
    require(nu > 0.0, "nu must be > 0");
    std::vector<ModeSpec> out;
    for (const auto& p : lattice_reps(d, K_lattice, mode_budget)) {
        ModeSpec md;
        md.m = -kTwoPiSq * nu * p.norm2;
        md.mult = p.mult;
        md.label = lattice_label(p.l);
        out.push_back(std::move(md));
    }
    return out;
}

std::vector<double> eigs_weyl_proxy(int d, double c, int K_max) {
    require(d >= 1, "d must be >= 1");
    require(c > 0.0, "c must be > 0");
    require(K_max >= 1, "K_max must be >= 1");
    std::vector<double> out(K_max);
    for (int k = 1; k <= K_max; ++k)
        out[k - 1] = c * std::pow(static_cast<double>(k), 2.0 / d);
    return out;
}

std::vector<BaseEig> base_eigs_torus(int d, int K_lattice, std::size_t mode_budget) {
    std::vector<BaseEig> out;
    for (const auto& p : lattice_reps(d, K_lattice, mode_budget))
        out.push_back({kTwoPiSq * p.norm2, p.mult, lattice_label(p.l)});
    return out;
}

std::vector<BaseEig> base_eigs_weyl(int d, double c, int K_max) {
    std::vector<BaseEig> out;
    const auto mags = eigs_weyl_proxy(d, c, K_max);
    for (std::size_t k = 0; k < mags.size(); ++k)
        out.push_back({mags[k], 1, "k" + std::to_string(k + 1)});
    return out;
}

SpectralModel model_fractional_laplacian(int d, double rho, double beta,
                                         const std::vector<BaseEig>& base_eigs,
                                         double eps, double T,
                                         double theta_lo, double theta_hi) {
    check_common_fields(eps, T, theta_lo, theta_hi);
    require(rho > 0.0, "rho must be > 0");
    require(beta >= 0.0, "beta must be >= 0");
    bool any_positive = std::any_of(base_eigs.begin(), base_eigs.end(),
                                    [](const BaseEig& e) { return e.mu > 0.0; });
    if (any_positive && theta_lo <= 0.0)
        throw std::invalid_argument("fractional Laplacian family needs theta_lo > 0");
    SpectralModel model;
    model.dim = d;
    model.eps = eps;
    model.T = T;
    model.theta_lo = theta_lo;
    model.theta_hi = theta_hi;
    model.meta = "fractional Laplacian";
    for (const BaseEig& e : base_eigs) {
        const double mu_rho = std::pow(e.mu, rho);
        ModeSpec md;
        md.m = 0.0;
        md.ell = {-mu_rho, 0.0};
        md.b = std::pow(1.0 + mu_rho, -beta);
        md.mult = e.mult;
        md.label = e.label;
        model.modes.push_back(std::move(md));
    }
    model.validate();
    return model;
}

SpectralModel model_transport(int d, double nu, const std::vector<double>& xi,
                              double beta, int K_lattice, double eps, double T,
                              double theta_lo, double theta_hi) {
    check_common_fields(eps, T, theta_lo, theta_hi);
    require(static_cast<int>(xi.size()) == d, "xi must have d components");
    double xi_norm = 0.0;
    for (double c : xi) xi_norm += c * c;
    require(xi_norm > 0.0, "xi must be nonzero");
    require(nu > 0.0, "nu must be > 0");
    SpectralModel model;
    model.dim = d;
    model.eps = eps;
    model.T = T;
    model.theta_lo = theta_lo;
    model.theta_hi = theta_hi;
    model.meta = "transport";
    for (const auto& p : lattice_reps(d, K_lattice, 200000)) {
        double dot = 0.0;
        for (int i = 0; i < d; ++i) dot += xi[i] * p.l[i];
        ModeSpec md;
        md.m = -kTwoPiSq * nu * p.norm2;
        md.ell = {0.0, 2.0 * M_PI * dot};
        md.b = std::pow(1.0 + kTwoPiSq * p.norm2, -beta);
        md.mult = p.mult;
        md.label = lattice_label(p.l);
        model.modes.push_back(std::move(md));
    }
    model.validate();
    return model;
}

SpectralModel model_source(int d, double nu, double beta,
                           const std::vector<BaseEig>& base_eigs, double eps,
                           double T, double theta_lo, double theta_hi) {
    check_common_fields(eps, T, theta_lo, theta_hi);
    require(theta_lo > 0.0, "source family needs theta_lo > 0");
    require(nu > 0.0, "nu must be > 0");
    SpectralModel model;
    model.dim = d;
    model.eps = eps;
    model.T = T;
    model.theta_lo = theta_lo;
    model.theta_hi = theta_hi;
    model.meta = "source";
    for (const BaseEig& e : base_eigs) {
        ModeSpec md;
        md.m = -nu * e.mu;
        md.ell = {-1.0, 0.0};
        md.b = std::pow(1.0 + nu * e.mu, -beta);
        md.mult = e.mult;
        md.label = e.label;
        model.modes.push_back(std::move(md));
    }
    model.validate();
    return model;
}

SpectralModel model_ou(double sigma, double eps, double T, double theta_lo,
                       double theta_hi) {
    check_common_fields(eps, T, theta_lo, theta_hi);
    require(sigma > 0.0, "sigma must be > 0");
    require(theta_lo >= 0.0, "OU family needs theta_lo >= 0");
    SpectralModel model;
    model.dim = 1;
    model.eps = eps;
    model.T = T;
    model.theta_lo = theta_lo;
    model.theta_hi = theta_hi;
    model.meta = "scalar OU";
    ModeSpec md;
    md.m = 0.0;
    md.ell = {-1.0, 0.0};
    md.b = sigma;
    md.mult = 1;
    md.label = "0";
    model.modes.push_back(std::move(md));
    model.validate();
    return model;
}

std::vector<ModeLambda> assemble_lambda(const SpectralModel& model, double theta) {
    if (theta < model.theta_lo || theta > model.theta_hi)
        throw std::invalid_argument("theta outside [theta_lo, theta_hi]");
    std::vector<ModeLambda> out;
    out.reserve(model.modes.size());
    for (std::size_t k = 0; k < model.modes.size(); ++k) {
        const ModeSpec& md = model.modes[k];
        const std::complex<double> lam = md.m + theta * md.ell;
        if (std::real(lam) > 0.0)
            throw std::invalid_argument("contractivity fails at mode " + std::to_string(k) +
                                        " (label " + md.label + ")");
        out.push_back({lam, std::real(lam), std::imag(lam)});
    }
    return out;
}

SpectralModel model_from_descriptor(const ModelDescriptor& desc) {
    SpectralModel model;
    if (desc.family == "ou") {
        model = model_ou(desc.sigma, desc.eps, desc.T, desc.theta_lo, desc.theta_hi);
    } else if (desc.family == "frac_laplacian") {
        const auto base = desc.base == "weyl"
                              ? base_eigs_weyl(desc.d, desc.weyl_c, desc.K_max)
                              : base_eigs_torus(desc.d, desc.K_lattice);
        model = model_fractional_laplacian(desc.d, desc.rho, desc.beta, base,
                                           desc.eps, desc.T, desc.theta_lo,
                                           desc.theta_hi);
    } else if (desc.family == "transport") {
        model = model_transport(desc.d, desc.nu, desc.xi, desc.beta, desc.K_lattice,
                                desc.eps, desc.T, desc.theta_lo, desc.theta_hi);
    } else if (desc.family == "source") {
        const auto base = desc.base == "weyl"
                              ? base_eigs_weyl(desc.d, desc.weyl_c, desc.K_max)
                              : base_eigs_torus(desc.d, desc.K_lattice);
        model = model_source(desc.d, desc.nu, desc.beta, base, desc.eps, desc.T,
                             desc.theta_lo, desc.theta_hi);
    } else {
        throw std::invalid_argument("unknown model family: " + desc.family);
    }
    model.has_descriptor = true;
    model.descriptor = desc;
    return model;
}

std::string model_to_json(const SpectralModel& model) {
    if (!model.has_descriptor)
        throw std::invalid_argument("only descriptor-built models serialize");
    const ModelDescriptor& d = model.descriptor;
    nlohmann::json j;
    j["family"] = d.family;
    j["d"] = d.d;
    j["eps"] = d.eps;
    j["T"] = d.T;
    j["theta_lo"] = d.theta_lo;
    j["theta_hi"] = d.theta_hi;
    if (d.family == "ou") {
        j["sigma"] = d.sigma;
    } else {
        j["beta"] = d.beta;
        if (d.family == "frac_laplacian") j["rho"] = d.rho;
        if (d.family == "transport" || d.family == "source") j["nu"] = d.nu;
        if (d.family == "transport") j["xi"] = d.xi;
        if (d.family == "transport" || d.base == "torus") {
            j["K_lattice"] = d.K_lattice;
        } else {
            j["K_max"] = d.K_max;
            j["weyl_c"] = d.weyl_c;
            j["base"] = "weyl";
        }
    }
    return j.dump(2);
}

SpectralModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("model JSON parse error: ") + e.what());
    }
    ModelDescriptor d;
    try {
        d.family = j.at("family").get<std::string>();
        d.d = j.value("d", 1);
        d.eps = j.value("eps", 0.0);
        d.T = j.value("T", 1.0);
        d.theta_lo = j.value("theta_lo", 0.0);
        d.theta_hi = j.value("theta_hi", 1.0);
        d.sigma = j.value("sigma", 1.0);
        d.beta = j.value("beta", 0.0);
        d.rho = j.value("rho", 1.0);
        d.nu = j.value("nu", 1.0);
        d.xi = j.value("xi", std::vector<double>{});
        d.K_lattice = j.value("K_lattice", 0);
        d.K_max = j.value("K_max", 0);
        d.weyl_c = j.value("weyl_c", 1.0);
        d.base = j.value("base", j.contains("K_max") ? "weyl" : "torus");
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("model JSON field error: ") + e.what());
    }
    return model_from_descriptor(d);
}

}  // namespace spde
