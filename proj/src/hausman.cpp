#include "tmg/hausman.hpp"

#include <cmath>

#include "tmg/chisq.hpp"
#include "tmg/error.hpp"

namespace tmg {

const char* to_string(HausmanVariant v) {
    switch (v) {
        case HausmanVariant::NoTE: return "NoTE";
        case HausmanVariant::TE_TeqK: return "TE_TeqK";
        case HausmanVariant::TE_TgtK: return "TE_TgtK";
    }
    return "?";
}

HausmanResult hausman_statistic(const VectorXd& delta, const MatrixXd& v_delta, int n, HausmanVariant variant,
                                double coef_scale) {
    HausmanResult h;
    h.df = static_cast<int>(delta.size());
    h.variant = variant;
    h.delta = delta;
    h.v_delta = v_delta;
    // Exactly coincident estimators (noiseless fits) give no evidence against the null.
    if (delta.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + coef_scale)) {
        h.statistic = 0.0;
        h.p_value = 1.0;
        return h;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrize(v_delta));
    const VectorXd& ev = eig.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    if (!(top > 0.0) || !std::isfinite(top)) throw Error(ErrorKind::SingularVdelta, "variance of the contrast is zero");
    VectorXd inv = VectorXd::Zero(ev.size());
    int rank = 0;
    for (Eigen::Index j = 0; j < ev.size(); ++j)
        if (ev(j) > 1e-12 * top) {
            inv(j) = 1.0 / ev(j);
            ++rank;
        }
    if (rank < h.df)
        throw Error(ErrorKind::SingularVdelta,
                    "variance of the contrast has rank " + std::to_string(rank) + " < " + std::to_string(h.df));
    const VectorXd z = eig.eigenvectors().transpose() * delta;
    h.statistic = n * z.dot(inv.asDiagonal() * z);
    h.p_value = chisq_sf(h.statistic, h.df);
    return h;
}

HausmanResult hausman_no_te(const BalancedPanel& panel, const TrimConfig& cfg) {
    return hausman_no_te(panel, build_designs(panel), cfg);
}

HausmanResult hausman_no_te(const BalancedPanel& panel, const std::vector<UnitDesign>& designs,
                            const TrimConfig& cfg) {
    const int n = panel.n();
    const int kp = panel.k_prime();
    const Estimate fe_est = fe(panel);
    const TrimState state = trim(designs, cfg);
    const Estimate tmg_est = tmg(panel, designs, state, cfg.alpha);

    MatrixXd psi_bar = MatrixXd::Zero(kp, kp);
    for (const auto& u : designs) psi_bar += u.psi_x;
    psi_bar /= n;
    const MatrixXd psi_bar_inv = solve_checked(psi_bar, MatrixXd::Identity(kp, kp), ErrorKind::SingularPooledGram,
                                               "pooled within Gram is singular");
    const double scale = 1.0 + state.delta_bar;
    MatrixXd g(n, kp);
    for (int i = 0; i < n; ++i) {
        const MatrixXd xw = within(MatrixXd(panel.X(i)));
        const VectorXd nu = within(VectorXd(panel.y(i))) - xw * fe_est.coef;
        const VectorXd xnu = xw.transpose() * nu;
        // (1+delta_i) Psi_ix^{-1} is the slope block of adj / max(d_i, a_n)
        const MatrixXd weighted_inv =
            designs[i].adj.bottomRightCorner(kp, kp) / trimmed_divisor(designs[i], state.a_n);
        g.row(i) = (psi_bar_inv * xnu - weighted_inv * xnu / scale).transpose();
    }
    const MatrixXd v = symmetrize(g.transpose() * g / n);
    const VectorXd delta = fe_est.coef - tmg_est.slopes();
    return hausman_statistic(delta, v, n, HausmanVariant::NoTE, fe_est.coef.cwiseAbs().maxCoeff());
}

HausmanResult hausman_te(const BalancedPanel& panel, const TrimConfig& cfg) {
    return hausman_te(panel, build_designs(panel), cfg);
}

HausmanResult hausman_te(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, const TrimConfig& cfg) {
    const int n = panel.n();
    const int T = panel.T();
    const int kp = panel.k_prime();
    const FeTeFit fe_fit = fete_fit(panel);
    const MeanGroupTeFit mg_fit = tmg_te_fit(panel, designs, cfg);
    const double scale = 1.0 + mg_fit.trim.delta_bar;
    const MatrixXd psi_inv = solve_checked(fe_fit.psi_bar, MatrixXd::Identity(kp, kp), ErrorKind::SingularPooledGram,
                                           "pooled two-way Gram is singular");
    const MatrixXd mt = MatrixXd::Identity(T, T) - MatrixXd::Constant(T, T, 1.0 / T);
    const MatrixXd q_bar_x = mg_fit.Q_bar.rightCols(kp);
    const bool square = T == panel.k();

    MatrixXd correction;  // T = k: [(I - Q_bar_x' M_T Xbar)^{-1}]'
    MatrixXd chamberlain_term;  // T > k: M_bar^{-1} M_T Q_bar_x
    if (square) {
        const MatrixXd sys = MatrixXd::Identity(kp, kp) - q_bar_x.transpose() * mt * fe_fit.X_bar;
        correction = solve_checked(sys, MatrixXd::Identity(kp, kp), ErrorKind::SingularTeSystem,
                                   "I - Q_bar_x' M_T Xbar is singular")
                         .transpose();
    } else {
        chamberlain_term = solve_checked(mg_fit.M_bar, mt * q_bar_x, ErrorKind::SingularMbar,
                                         "average Chamberlain projector is singular");
    }

    MatrixXd g(n, kp);
    for (int i = 0; i < n; ++i) {
        const MatrixXd xc = panel.X(i) - fe_fit.X_bar;
        const VectorXd nu = (panel.y(i) - fe_fit.y_bar) - xc * fe_fit.est.coef;
        const MatrixXd q_ix = mg_fit.Q[i].rightCols(kp);
        MatrixXd G = xc * psi_inv;
        if (square)
            G -= q_ix * correction / scale;
        else
            G -= q_ix / scale - mg_fit.M[i] * chamberlain_term;
        g.row(i) = (G.transpose() * within(nu)).transpose();
    }
    const MatrixXd v = symmetrize(g.transpose() * g / n);
    const VectorXd delta = fe_fit.est.coef - mg_fit.est.slopes();
    return hausman_statistic(delta, v, n, square ? HausmanVariant::TE_TeqK : HausmanVariant::TE_TgtK,
                             fe_fit.est.coef.cwiseAbs().maxCoeff());
}

}  // namespace tmg
