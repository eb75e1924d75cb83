#pragma once

#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "tmg/panel.hpp"

namespace testutil {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double max_abs(const MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double rel_err(const MatrixXd& a, const MatrixXd& b) {
    return max_abs(a - b) / std::max(max_abs(b), 1e-300);
}

// y_it = alpha_i + phi_t + x_it' beta_i + noise * e_it
inline tmg::BalancedPanel make_panel(std::mt19937_64& rng, int n, int T, int kp, double noise = 1.0,
                                     double beta_sd = 0.5, const VectorXd& phi = VectorXd()) {
    std::normal_distribution<double> z;
    VectorXd y(n * T);
    MatrixXd x(n * T, kp);
    for (int i = 0; i < n; ++i) {
        const double a = 1.0 + 0.5 * z(rng);
        VectorXd b(kp);
        for (int j = 0; j < kp; ++j) b(j) = 1.0 + beta_sd * z(rng);
        const double spread = 0.2 + std::abs(z(rng));
        for (int t = 0; t < T; ++t) {
            for (int j = 0; j < kp; ++j) x(i * T + t, j) = 0.5 * z(rng) + spread * z(rng);
            y(i * T + t) = a + (phi.size() ? phi(t) : 0.0) + x.row(i * T + t).dot(b) + noise * z(rng);
        }
    }
    return tmg::BalancedPanel(n, T, y, x);
}

inline tmg::BalancedPanel with_y(const tmg::BalancedPanel& p, const VectorXd& y) {
    return tmg::BalancedPanel(p.n(), p.T(), y, p.x_all(), p.unit_ids(), p.time_ids());
}

inline tmg::BalancedPanel with_x(const tmg::BalancedPanel& p, const MatrixXd& x) {
    return tmg::BalancedPanel(p.n(), p.T(), p.y_all(), x, p.unit_ids(), p.time_ids());
}

}  // namespace testutil
