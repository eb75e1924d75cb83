#include "tmg/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "tmg/error.hpp"

namespace tmg {

const char* to_string(Method m) {
    switch (m) {
        case Method::FE: return "FE";
        case Method::MG: return "MG";
        case Method::TMG: return "TMG";
        case Method::GP: return "GP";
        case Method::FE_TE: return "FE-TE";
        case Method::TMG_TE: return "TMG-TE";
        case Method::GP_TE: return "GP-TE";
    }
    return "?";
}

bool Estimate::has_intercept() const {
    return method != Method::FE && method != Method::FE_TE;
}

VectorXd Estimate::se() const {
    return cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

VectorXd Estimate::slopes() const {
    return has_intercept() ? VectorXd(coef.tail(coef.size() - 1)) : coef;
}

MatrixXd Estimate::slope_cov() const {
    const auto kp = slopes().size();
    return cov.bottomRightCorner(kp, kp);
}

MatrixXd solve_checked(const MatrixXd& a, const MatrixXd& b, ErrorKind kind, const char* what) {
    Eigen::FullPivLU<MatrixXd> lu(a);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible() || !std::isfinite(a.sum())) throw Error(kind, what);
    return lu.solve(b);
}

MatrixXd symmetrize(const MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

namespace {

// Sum of outer products of the rows of dev, scaled.
MatrixXd outer_sum(const MatrixXd& dev, double scale) {
    return symmetrize(dev.transpose() * dev * scale);
}

}  // namespace

Estimate fe(const BalancedPanel& panel) {
    const int n = panel.n();
    const int kp = panel.k_prime();
    MatrixXd psi_sum = MatrixXd::Zero(kp, kp);
    VectorXd xy_sum = VectorXd::Zero(kp);
    std::vector<MatrixXd> xw(n);
    std::vector<VectorXd> yw(n);
    for (int i = 0; i < n; ++i) {
        xw[i] = within(MatrixXd(panel.X(i)));
        yw[i] = within(VectorXd(panel.y(i)));
        psi_sum += xw[i].transpose() * xw[i];
        xy_sum += xw[i].transpose() * yw[i];
    }
    Estimate e;
    e.method = Method::FE;
    e.coef = solve_checked(psi_sum, xy_sum, ErrorKind::SingularPooledGram, "pooled within Gram is singular");
    MatrixXd scores(n, kp);
    for (int i = 0; i < n; ++i) scores.row(i) = (xw[i].transpose() * (yw[i] - xw[i] * e.coef)).transpose();
    const MatrixXd meat = scores.transpose() * scores;
    const MatrixXd bread = solve_checked(psi_sum, MatrixXd::Identity(kp, kp), ErrorKind::SingularPooledGram,
                                         "pooled within Gram is singular");
    e.cov = symmetrize(bread * meat * bread);
    e.n_used = n;
    return e;
}

Estimate mg(const BalancedPanel& panel) {
    return mg(panel, build_designs(panel));
}

Estimate mg(const BalancedPanel& panel, const std::vector<UnitDesign>& designs) {
    const int n = panel.n();
    std::string bad;
    int nbad = 0;
    for (int i = 0; i < n; ++i)
        if (designs[i].singular()) {
            if (nbad < 10) bad += (nbad ? "," : "") + panel.unit_ids()[i];
            ++nbad;
        }
    if (nbad > 0)
        throw Error(ErrorKind::SingularDesign,
                    std::to_string(nbad) + " unit(s) with zero determinant: " + bad + (nbad > 10 ? ",..." : ""));
    MatrixXd theta(n, panel.k());
    for (int i = 0; i < n; ++i) theta.row(i) = unit_ols(designs[i], panel.y(i)).transpose();
    Estimate e;
    e.method = Method::MG;
    e.coef = theta.colwise().mean().transpose();
    const MatrixXd dev = theta.rowwise() - e.coef.transpose();
    e.cov = outer_sum(dev, 1.0 / (static_cast<double>(n) * (n - 1)));
    e.n_used = n;
    e.per_unit = std::move(theta);
    return e;
}

Estimate tmg(const BalancedPanel& panel, const TrimConfig& cfg) {
    return tmg(panel, build_designs(panel), cfg);
}

Estimate tmg(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, const TrimConfig& cfg) {
    return tmg(panel, designs, trim(designs, cfg), cfg.alpha);
}

Estimate tmg(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, const TrimState& state,
             double alpha) {
    const int n = panel.n();
    if (state.pi_n >= 1.0) throw Error(ErrorKind::AllTrimmed, "every unit falls below the trimming threshold");
    MatrixXd theta(n, panel.k());
    for (int i = 0; i < n; ++i)
        theta.row(i) = trimmed_unit_estimate(designs[i], panel.y(i), state.a_n).transpose();
    const double scale = 1.0 + state.delta_bar;
    Estimate e;
    e.method = Method::TMG;
    e.coef = theta.colwise().mean().transpose() / scale;
    const MatrixXd dev = theta.rowwise() - e.coef.transpose();
    e.cov = outer_sum(dev, 1.0 / (static_cast<double>(n) * (n - 1) * scale * scale));
    e.n_used = n;
    e.pi_n = state.pi_n;
    e.alpha_used = alpha;
    e.per_unit = std::move(theta);
    return e;
}

double sample_quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

GpTrim gp_trim(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, double alpha_gp) {
    if (!(alpha_gp > 0.0 && alpha_gp < 1.0))
        throw Error(ErrorKind::InvalidConfig, "alpha_gp must lie in (0,1)");
    const int n = panel.n();
    const double rate = std::pow(static_cast<double>(n), -alpha_gp);
    GpTrim g;
    g.trimmed.assign(n, 0);
    int count = 0;
    if (panel.T() == panel.k()) {
        std::vector<double> det_w(n);
        double mean = 0.0;
        for (int i = 0; i < n; ++i) {
            det_w[i] = determinant(designs[i].W);
            mean += det_w[i];
        }
        mean /= n;
        double ss = 0.0;
        for (double v : det_w) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / (n - 1));
        const double iqr = sample_quantile(det_w, 0.75) - sample_quantile(det_w, 0.25);
        g.c_gp = 0.5 * std::min(sd, iqr / 1.34);
        g.h_n = g.c_gp * rate;
        for (int i = 0; i < n; ++i)
            if (std::abs(det_w[i]) <= g.h_n || designs[i].singular()) g.trimmed[i] = 1;
    } else {
        g.c_gp = std::sqrt(determinants(designs).mean());
        g.h_n = g.c_gp * rate;
        const double h2 = g.h_n * g.h_n;
        for (int i = 0; i < n; ++i)
            if (designs[i].d < h2 || designs[i].singular()) g.trimmed[i] = 1;
    }
    for (char t : g.trimmed) count += t;
    g.pi_n = static_cast<double>(count) / n;
    return g;
}

Estimate gp(const BalancedPanel& panel, double alpha_gp) {
    return gp(panel, build_designs(panel), alpha_gp);
}

Estimate gp(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, double alpha_gp) {
    const GpTrim g = gp_trim(panel, designs, alpha_gp);
    const int n = panel.n();
    const int m = n - static_cast<int>(std::count(g.trimmed.begin(), g.trimmed.end(), 1));
    if (m < 1) throw Error(ErrorKind::AllTrimmed, "GP bandwidth trims every unit");
    MatrixXd theta(m, panel.k());
    for (int i = 0, r = 0; i < n; ++i)
        if (!g.trimmed[i]) theta.row(r++) = unit_ols(designs[i], panel.y(i)).transpose();
    Estimate e;
    e.method = Method::GP;
    e.coef = theta.colwise().mean().transpose();
    const MatrixXd dev = theta.rowwise() - e.coef.transpose();
    e.cov = m > 1 ? outer_sum(dev, 1.0 / (static_cast<double>(m) * (m - 1)))
                  : MatrixXd::Zero(panel.k(), panel.k());
    e.n_used = m;
    e.pi_n = g.pi_n;
    e.alpha_used = alpha_gp;
    return e;
}

EfficiencyDiagnostics efficiency_diagnostics(const BalancedPanel& panel, const MatrixXd& omega_beta,
                                             const std::vector<MatrixXd>& H) {
    const int n = panel.n();
    const int kp = panel.k_prime();
    if (static_cast<int>(H.size()) != n) throw Error(ErrorKind::InvalidConfig, "need one H_i per unit");
    MatrixXd psi_bar = MatrixXd::Zero(kp, kp);
    MatrixXd psi_omega_psi = MatrixXd::Zero(kp, kp);
    MatrixXd mg_term = MatrixXd::Zero(kp, kp);
    MatrixXd fe_term = MatrixXd::Zero(kp, kp);
    for (int i = 0; i < n; ++i) {
        const MatrixXd xw = within(MatrixXd(panel.X(i)));
        const MatrixXd psi = xw.transpose() * xw;
        const MatrixXd sandwich = xw.transpose() * H[i] * xw;  // X'M H M X
        const MatrixXd psi_inv =
            solve_checked(psi, MatrixXd::Identity(kp, kp), ErrorKind::SingularUnitGram, "unit within Gram is singular");
        psi_bar += psi;
        psi_omega_psi += psi * omega_beta * psi;
        mg_term += psi_inv * sandwich * psi_inv;
        fe_term += sandwich;
    }
    psi_bar /= n;
    const MatrixXd pinv = solve_checked(psi_bar, MatrixXd::Identity(kp, kp), ErrorKind::SingularPooledGram,
                                        "pooled within Gram is singular");
    EfficiencyDiagnostics out;
    out.A_n = symmetrize(omega_beta - pinv * (psi_omega_psi / n) * pinv);
    out.B_n = symmetrize(mg_term / n - pinv * (fe_term / n) * pinv);
    return out;
}

}  // namespace tmg
