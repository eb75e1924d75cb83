#include "tmg/dgp.hpp"

#include <cmath>

#include "tmg/design.hpp"
#include "tmg/error.hpp"

namespace tmg {

void DgpConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw Error(ErrorKind::InvalidConfig, field + ": " + why);
    };
    if (n < 2) fail("n", "must be at least 2");
    if (T < 2) fail("T", "must be at least 2");
    if (!(sigma2_alpha >= 0.0)) fail("sigma2_alpha", "must be non-negative");
    if (!(sigma2_beta >= 0.0)) fail("sigma2_beta", "must be non-negative");
    if (!(rho_alpha >= 0.0 && rho_alpha < 1.0)) fail("rho_alpha", "must lie in [0,1)");
    if (!(rho_beta >= 0.0 && rho_beta < 1.0)) fail("rho_beta", "must lie in [0,1)");
    if (!(pr2 > 0.0 && pr2 < 1.0)) fail("pr2", "must lie in (0,1)");
    if (kappa2 && !(*kappa2 >= 0.0)) fail("kappa2", "must be non-negative");
    if (burn_in < 0) fail("burn_in", "must be non-negative");
}

VectorXd DgpConfig::phi() const {
    VectorXd p = VectorXd::Zero(T);
    if (!time_effects) return p;
    for (int t = 1; t < T; ++t) p(t - 1) = t;
    p(T - 1) = -0.5 * T * (T - 1);
    return p;
}

RegressorDraws generate_regressors(const DgpConfig& cfg, std::uint64_t rep, StreamDomain domain) {
    const int n = cfg.n;
    const int T = cfg.T;
    const int burn = cfg.burn_in;
    Stream rx(cfg.seed, domain, rep, StreamRole::Regressor);

    // common factor over t = -burn+1 .. T, started at zero
    std::vector<double> f(static_cast<std::size_t>(burn + T), 0.0);
    if (cfg.interactive_x) {
        Stream rf(cfg.seed, domain, rep, StreamRole::Factor);
        double prev = 0.0;
        const double s = std::sqrt(1.0 - 0.81);
        for (auto& ft : f) prev = ft = 0.9 * prev + s * rf.normal();
    }

    RegressorDraws out;
    out.x.resize(n, T);
    out.e_x.resize(n, T);
    out.lambda.resize(n);
    out.sigma2_x.resize(n);
    const double lam_sd = std::sqrt(2.0 * (T - 1) + cfg.gamma2() * (T - 1) * (T - 1) / T);
    const bool uniform = cfg.x_error_dist == DgpConfig::XError::UniformScaled;
    const double sqrt12 = std::sqrt(12.0);

    for (int i = 0; i < n; ++i) {
        // unit parameters are always drawn so the stream layout is mode-independent
        const double alpha_x = 1.0 + rx.normal();
        const double z = rx.normal();
        const double rho_draw = rx.uniform(0.0, 0.95);
        const double gamma_draw = rx.uniform(0.0, 2.0);
        const double sigma2 = 0.5 * (1.0 + z * z);
        const double sigma = std::sqrt(sigma2);
        const double rho = cfg.rho_ix_mode == DgpConfig::ArMode::UniformUpTo095 ? rho_draw : 0.0;
        const double gamma = cfg.interactive_x ? gamma_draw : 0.0;
        const double innov = std::sqrt(1.0 - rho * rho) * sigma;

        double prev = 0.0;
        for (int s = 0; s < burn + T; ++s) {
            const double e = uniform ? sqrt12 * (rx.uniform() - 0.5) : rx.normal();
            prev = alpha_x * (1.0 - rho) + gamma * f[static_cast<std::size_t>(s)] + rho * prev + innov * e;
            if (s >= burn) {
                out.x(i, s - burn) = prev;
                out.e_x(i, s - burn) = e;
            }
        }
        const VectorXd ew = within(VectorXd(out.e_x.row(i).transpose()));
        out.lambda(i) = (ew.squaredNorm() - (T - 1)) / lam_sd;
        out.sigma2_x(i) = sigma2;
    }
    return out;
}

void generate_coefficients(const DgpConfig& cfg, std::uint64_t rep, StreamDomain domain, const VectorXd& lambda,
                           VectorXd& alpha, VectorXd& beta) {
    const int n = cfg.n;
    Stream rc(cfg.seed, domain, rep, StreamRole::Coefficient);
    const double sa = std::sqrt(cfg.sigma2_eps_alpha());
    const double sb = std::sqrt(cfg.sigma2_eps_beta());
    alpha.resize(n);
    beta.resize(n);
    for (int i = 0; i < n; ++i) {
        const double ea = rc.normal();
        const double eb = rc.normal();
        alpha(i) = cfg.alpha0 + cfg.psi_alpha() * lambda(i) + sa * ea;
        beta(i) = cfg.beta0 + cfg.psi_beta() * lambda(i) + sb * eb;
    }
}

Replication generate_replication(const DgpConfig& cfg, std::uint64_t rep) {
    cfg.validate();
    if (!cfg.kappa2) throw Error(ErrorKind::InvalidConfig, "kappa2: not set; calibrate first");
    const int n = cfg.n;
    const int T = cfg.T;
    const StreamDomain dom = StreamDomain::Experiment;
    RegressorDraws xd = generate_regressors(cfg, rep, dom);

    Truth truth;
    generate_coefficients(cfg, rep, dom, xd.lambda, truth.alpha, truth.beta);
    truth.lambda = xd.lambda;
    truth.phi = cfg.phi();
    truth.sigma2_x = xd.sigma2_x;
    truth.u.resize(n, T);

    Stream ru(cfg.seed, dom, rep, StreamRole::OutcomeError);
    const double kappa = std::sqrt(*cfg.kappa2);
    const bool chisq = cfg.y_error_dist == DgpConfig::YError::ChiSq2Centered;
    for (int i = 0; i < n; ++i) {
        const double z = ru.normal();
        const double rho_draw = ru.uniform(0.0, 0.95);
        const double e0 = ru.normal();
        const double rho = cfg.rho_ie_mode == DgpConfig::ArMode::UniformUpTo095 ? rho_draw : 0.0;
        const double sigma_iu = std::sqrt(0.5 * (1.0 + z * z));
        const double scale = std::sqrt(1.0 - rho * rho);
        double e = e0;
        for (int t = 0; t < T; ++t) {
            double innov;
            if (chisq) {
                const double g1 = ru.normal();
                const double g2 = ru.normal();
                innov = 0.5 * (g1 * g1 + g2 * g2 - 2.0);
            } else {
                innov = ru.normal();
            }
            e = rho * e + scale * innov;
            double sigma = sigma_iu;
            if (cfg.heterosked == DgpConfig::Heterosked::CaseA_lambda2) sigma = std::abs(xd.lambda(i));
            else if (cfg.heterosked == DgpConfig::Heterosked::CaseB_ex2) sigma = std::abs(xd.e_x(i, t));
            truth.u(i, t) = kappa * sigma * e;
        }
    }

    VectorXd y(static_cast<Eigen::Index>(n) * T);
    MatrixXd x(static_cast<Eigen::Index>(n) * T, 1);
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < T; ++t) {
            const auto row = static_cast<Eigen::Index>(i) * T + t;
            x(row, 0) = xd.x(i, t);
            y(row) = truth.alpha(i) + truth.phi(t) + truth.beta(i) * xd.x(i, t) + truth.u(i, t);
        }
    return Replication{BalancedPanel(n, T, std::move(y), std::move(x)), std::move(truth)};
}

void FitMoments::add(const Replication& r) {
    const int n = r.panel.n();
    const int T = r.panel.T();
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < T; ++t) {
            const double u = r.truth.u(i, t);
            const double v = r.truth.beta(i) * r.panel.X(i)(t, 0) + u;
            sum_u2 += u * u;
            sum_v += v;
            sum_v2 += v * v;
            count += 1.0;
        }
}

double FitMoments::pr2() const {
    const double mean = sum_v / count;
    const double var = sum_v2 / count - mean * mean;
    return 1.0 - (sum_u2 / count) / var;
}

std::string to_string(DgpConfig::YError v) {
    return v == DgpConfig::YError::Gaussian ? "gaussian" : "chisq2";
}
std::string to_string(DgpConfig::XError v) {
    return v == DgpConfig::XError::Gaussian ? "gaussian" : "uniform";
}
std::string to_string(DgpConfig::ArMode v) {
    return v == DgpConfig::ArMode::Zero ? "zero" : "uniform095";
}
std::string to_string(DgpConfig::Heterosked v) {
    switch (v) {
        case DgpConfig::Heterosked::Random: return "random";
        case DgpConfig::Heterosked::CaseA_lambda2: return "lambda2";
        case DgpConfig::Heterosked::CaseB_ex2: return "ex2";
    }
    return "?";
}

}  // namespace tmg
