#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "tmg/panel.hpp"
#include "tmg/rng.hpp"

namespace tmg {

struct DgpConfig {
    enum class YError { Gaussian, ChiSq2Centered };
    enum class XError { Gaussian, UniformScaled };
    enum class ArMode { Zero, UniformUpTo095 };
    enum class Heterosked { Random, CaseA_lambda2, CaseB_ex2 };

    int n = 1000;
    int T = 2;
    double alpha0 = 1.0;
    double beta0 = 1.0;
    double sigma2_alpha = 0.2;
    double sigma2_beta = 0.5;
    double rho_alpha = 0.5;
    double rho_beta = 0.5;
    double pr2 = 0.2;
    YError y_error_dist = YError::ChiSq2Centered;
    XError x_error_dist = XError::Gaussian;
    ArMode rho_ie_mode = ArMode::Zero;
    ArMode rho_ix_mode = ArMode::UniformUpTo095;
    bool interactive_x = false;
    Heterosked heterosked = Heterosked::Random;
    bool time_effects = false;
    std::optional<double> kappa2;  // unset until calibrated
    std::uint64_t seed = 20240601;
    int burn_in = 50;

    void validate() const;

    double psi_alpha() const { return rho_alpha * std::sqrt(sigma2_alpha); }
    double psi_beta() const { return rho_beta * std::sqrt(sigma2_beta); }
    double sigma2_eps_alpha() const { return (1.0 - rho_alpha * rho_alpha) * sigma2_alpha; }
    double sigma2_eps_beta() const { return (1.0 - rho_beta * rho_beta) * sigma2_beta; }
    // excess kurtosis of the regressor innovations
    double gamma2() const { return x_error_dist == XError::Gaussian ? 0.0 : -1.2; }
    VectorXd phi() const;  // phi_t = t for t < T, phi_T = -T(T-1)/2; zero without time effects
};

// Regressor draws for one replication (n x T arrays).
struct RegressorDraws {
    MatrixXd x;
    MatrixXd e_x;  // sample-period innovations, t = 1..T
    VectorXd lambda;
    VectorXd sigma2_x;
};

struct Truth {
    VectorXd alpha;
    VectorXd beta;
    VectorXd lambda;
    VectorXd phi;
    VectorXd sigma2_x;
    MatrixXd u;  // n x T outcome errors kappa sigma_it e_it
};

struct Replication {
    BalancedPanel panel;
    Truth truth;
};

RegressorDraws generate_regressors(const DgpConfig& cfg, std::uint64_t rep, StreamDomain domain);
void generate_coefficients(const DgpConfig& cfg, std::uint64_t rep, StreamDomain domain, const VectorXd& lambda,
                           VectorXd& alpha, VectorXd& beta);
Replication generate_replication(const DgpConfig& cfg, std::uint64_t rep);

// Pooled sample analogue of the population fit, 1 - sum u^2 / sum (v - vbar)^2 with v = beta x + u.
struct FitMoments {
    double sum_u2 = 0.0;
    double sum_v = 0.0;
    double sum_v2 = 0.0;
    double count = 0.0;
    void add(const Replication& r);
    double pr2() const;
};

std::string to_string(DgpConfig::YError v);
std::string to_string(DgpConfig::XError v);
std::string to_string(DgpConfig::ArMode v);
std::string to_string(DgpConfig::Heterosked v);

}  // namespace tmg
