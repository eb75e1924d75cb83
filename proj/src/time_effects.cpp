#include "tmg/time_effects.hpp"

#include "tmg/error.hpp"

namespace tmg {

const char* to_string(PhiMethod m) {
    switch (m) {
        case PhiMethod::Chamberlain: return "Chamberlain";
        case PhiMethod::SystemSolve: return "SystemSolve";
        case PhiMethod::FETE: return "FE-TE";
    }
    return "?";
}

namespace {

MatrixXd within_operator(int T) {
    return MatrixXd::Identity(T, T) - MatrixXd::Constant(T, T, 1.0 / T);
}

MatrixXd outer_rows(const MatrixXd& dev, double scale) {
    return symmetrize(dev.transpose() * dev * scale);
}

// M_T [Xbar V_beta Xbar' + Omega/n] M_T with Omega from raw residuals y_i - X_i beta - phi.
MatrixXd phi_covariance(const BalancedPanel& panel, const VectorXd& beta, const MatrixXd& v_beta,
                        const VectorXd& phi, const MatrixXd& X_bar) {
    const int n = panel.n();
    const int T = panel.T();
    MatrixXd omega = MatrixXd::Zero(T, T);
    for (int i = 0; i < n; ++i) {
        const VectorXd r = panel.y(i) - panel.X(i) * beta - phi;
        omega += r * r.transpose();
    }
    omega /= (n - 1);
    const MatrixXd mt = within_operator(T);
    return symmetrize(mt * (X_bar * v_beta * X_bar.transpose() + omega / n) * mt);
}

}  // namespace

MatrixXd chamberlain_projector(const MatrixXd& X) {
    const int T = static_cast<int>(X.rows());
    const MatrixXd xw = within(X);
    Eigen::ColPivHouseholderQR<MatrixXd> qr(xw);
    const auto r = qr.rank();
    MatrixXd m = MatrixXd::Identity(T, T);
    if (r > 0) {
        const MatrixXd q = MatrixXd(qr.householderQ()).leftCols(r);
        m -= q * q.transpose();
    }
    return m;
}

FeTeFit fete_fit(const BalancedPanel& panel) {
    const int n = panel.n();
    const int kp = panel.k_prime();
    FeTeFit f;
    f.X_bar = panel.X_bar();
    f.y_bar = panel.y_bar();
    MatrixXd psi_sum = MatrixXd::Zero(kp, kp);
    VectorXd xy_sum = VectorXd::Zero(kp);
    std::vector<MatrixXd> xw(n);
    std::vector<VectorXd> yw(n);
    for (int i = 0; i < n; ++i) {
        xw[i] = within(MatrixXd(panel.X(i) - f.X_bar));
        yw[i] = within(VectorXd(panel.y(i) - f.y_bar));
        psi_sum += xw[i].transpose() * xw[i];
        xy_sum += xw[i].transpose() * yw[i];
    }
    f.psi_bar = psi_sum / n;
    Estimate& e = f.est;
    e.method = Method::FE_TE;
    e.coef = solve_checked(psi_sum, xy_sum, ErrorKind::SingularPooledGram, "pooled two-way Gram is singular");
    MatrixXd scores(n, kp);
    for (int i = 0; i < n; ++i) scores.row(i) = (xw[i].transpose() * (yw[i] - xw[i] * e.coef)).transpose();
    const MatrixXd bread = solve_checked(psi_sum, MatrixXd::Identity(kp, kp), ErrorKind::SingularPooledGram,
                                         "pooled two-way Gram is singular");
    e.cov = symmetrize(bread * (scores.transpose() * scores) * bread);
    e.n_used = n;
    f.te.method = PhiMethod::FETE;
    f.te.phi = within(VectorXd(f.y_bar - f.X_bar * e.coef));
    f.te.cov = phi_covariance(panel, e.coef, e.cov, f.te.phi, f.X_bar);
    return f;
}

Chamberlain chamberlain_fit(const BalancedPanel& panel) {
    const int n = panel.n();
    const int T = panel.T();
    if (T <= panel.k())
        throw Error(ErrorKind::RequiresTGreaterK, "Chamberlain time effects need T > k, got T=" + std::to_string(T));
    Chamberlain c;
    c.M.resize(n);
    c.M_bar = MatrixXd::Zero(T, T);
    VectorXd rhs = VectorXd::Zero(T);
    std::vector<VectorXd> yw(n);
    for (int i = 0; i < n; ++i) {
        c.M[i] = chamberlain_projector(panel.X(i));
        yw[i] = within(VectorXd(panel.y(i)));
        c.M_bar += c.M[i];
        rhs += c.M[i] * yw[i];
    }
    c.M_bar /= n;
    rhs /= n;
    const MatrixXd m_inv = solve_checked(c.M_bar, MatrixXd::Identity(T, T), ErrorKind::SingularMbar,
                                         "average Chamberlain projector is singular");
    c.te.method = PhiMethod::Chamberlain;
    c.te.phi = m_inv * rhs;
    const VectorXd phi_w = within(c.te.phi);
    MatrixXd meat = MatrixXd::Zero(T, T);
    for (int i = 0; i < n; ++i) {
        const VectorXd s = c.M[i] * (yw[i] - phi_w);  // M_i M_T (y_i - phi)
        meat += s * s.transpose();
    }
    c.te.cov = symmetrize(m_inv * (meat / n) * m_inv / n);
    return c;
}

namespace {

// Shared mean-group TE machinery. divisor[i] > 0 scales adj W' for unit i, divisor[i] == 0 drops it.
// scale is 1 + delta_bar for TMG and the retained share for GP.
MeanGroupTeFit mean_group_te(const BalancedPanel& panel, const std::vector<UnitDesign>& designs,
                             const VectorXd& divisor, double scale, bool hard_trim, Method method) {
    const int n = panel.n();
    const int T = panel.T();
    const int k = panel.k();
    MeanGroupTeFit f;
    f.Q.resize(n);
    MatrixXd q_sum = MatrixXd::Zero(T, k);
    int m = 0;
    for (int i = 0; i < n; ++i) {
        if (divisor(i) > 0.0) {
            f.Q[i] = designs[i].W * designs[i].adj / divisor(i);
            ++m;
        } else {
            f.Q[i] = MatrixXd::Zero(T, k);
        }
        q_sum += f.Q[i];
    }
    if (m == 0) throw Error(ErrorKind::AllTrimmed, "no unit contributes to the mean-group estimate");
    f.Q_bar = q_sum / (n * scale);
    const MatrixXd mt = within_operator(T);
    const double denom = hard_trim ? static_cast<double>(m) * (m - 1) : static_cast<double>(n) * (n - 1) * scale * scale;

    Estimate& e = f.est;
    e.method = method;
    e.n_used = hard_trim ? m : n;

    if (T > k) {
        Chamberlain c = chamberlain_fit(panel);
        f.te = c.te;
        f.M = std::move(c.M);
        f.M_bar = std::move(c.M_bar);
        MatrixXd theta(n, k);
        for (int i = 0; i < n; ++i) theta.row(i) = (f.Q[i].transpose() * (panel.y(i) - f.te.phi)).transpose();
        e.coef = theta.colwise().sum().transpose() / (n * scale);
        MatrixXd dev(hard_trim ? m : n, k);
        for (int i = 0, r = 0; i < n; ++i)
            if (!hard_trim || divisor(i) > 0.0) dev.row(r++) = theta.row(i) - e.coef.transpose();
        e.cov = symmetrize(outer_rows(dev, denom > 0 ? 1.0 / denom : 0.0) + f.Q_bar.transpose() * f.te.cov * f.Q_bar);
        e.per_unit = std::move(theta);
        return f;
    }

    // T = k: solve theta = theta_mg - Q_bar' phi jointly with phi = M_T (ybar - Wbar theta).
    const VectorXd y_bar = panel.y_bar();
    MatrixXd w_bar(T, k);
    w_bar.col(0).setOnes();
    w_bar.rightCols(k - 1) = panel.X_bar();
    MatrixXd theta_raw(n, k);
    for (int i = 0; i < n; ++i) theta_raw.row(i) = (f.Q[i].transpose() * panel.y(i)).transpose();
    const VectorXd theta_mg = theta_raw.colwise().sum().transpose() / (n * scale);
    f.system = MatrixXd::Identity(k, k) - f.Q_bar.transpose() * mt * w_bar;
    Eigen::FullPivLU<MatrixXd> lu(f.system);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw Error(ErrorKind::SingularTeSystem, "I_k - Q_bar' M_T Wbar is singular");
    e.coef = lu.solve(theta_mg - f.Q_bar.transpose() * mt * y_bar);
    f.te.method = PhiMethod::SystemSolve;
    f.te.phi = mt * (y_bar - w_bar * e.coef);

    MatrixXd dev(hard_trim ? m : n, k);
    for (int i = 0, r = 0; i < n; ++i)
        if (!hard_trim || divisor(i) > 0.0)
            dev.row(r++) = (theta_raw.row(i) - (f.Q[i].transpose() * f.te.phi).transpose()) - e.coef.transpose();
    const MatrixXd sys_inv = lu.inverse();
    MatrixXd v_theta;
    if (hard_trim)
        v_theta = outer_rows(dev, m > 1 ? 1.0 / denom : 0.0);
    else
        v_theta = outer_rows(dev, 1.0 / ((n - 1) * scale * scale)) / (n - 1);
    e.cov = symmetrize(sys_inv * v_theta * sys_inv.transpose());
    const VectorXd beta = e.coef.tail(k - 1);
    f.te.cov = phi_covariance(panel, beta, e.cov.bottomRightCorner(k - 1, k - 1), f.te.phi, w_bar.rightCols(k - 1));
    e.per_unit = std::move(theta_raw);
    return f;
}

}  // namespace

MeanGroupTeFit tmg_te_fit(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, const TrimConfig& cfg) {
    const TrimState state = trim(designs, cfg);
    if (state.pi_n >= 1.0) throw Error(ErrorKind::AllTrimmed, "every unit falls below the trimming threshold");
    VectorXd divisor(panel.n());
    for (int i = 0; i < panel.n(); ++i) divisor(i) = trimmed_divisor(designs[i], state.a_n);
    MeanGroupTeFit f = mean_group_te(panel, designs, divisor, 1.0 + state.delta_bar, false, Method::TMG_TE);
    f.trim = state;
    f.est.pi_n = state.pi_n;
    f.est.alpha_used = cfg.alpha;
    return f;
}

MeanGroupTeFit gp_te_fit(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, double alpha_gp) {
    const GpTrim g = gp_trim(panel, designs, alpha_gp);
    VectorXd divisor(panel.n());
    for (int i = 0; i < panel.n(); ++i) divisor(i) = g.trimmed[i] ? 0.0 : designs[i].d;
    MeanGroupTeFit f = mean_group_te(panel, designs, divisor, 1.0 - g.pi_n, true, Method::GP_TE);
    f.est.pi_n = g.pi_n;
    f.est.alpha_used = alpha_gp;
    return f;
}

std::pair<Estimate, TimeEffects> fete(const BalancedPanel& panel) {
    FeTeFit f = fete_fit(panel);
    return {std::move(f.est), std::move(f.te)};
}

TimeEffects chamberlain_phi(const BalancedPanel& panel) {
    return chamberlain_fit(panel).te;
}

std::pair<Estimate, TimeEffects> tmg_te(const BalancedPanel& panel, const TrimConfig& cfg) {
    MeanGroupTeFit f = tmg_te_fit(panel, build_designs(panel), cfg);
    return {std::move(f.est), std::move(f.te)};
}

std::pair<Estimate, TimeEffects> gp_te(const BalancedPanel& panel, double alpha_gp) {
    MeanGroupTeFit f = gp_te_fit(panel, build_designs(panel), alpha_gp);
    return {std::move(f.est), std::move(f.te)};
}

}  // namespace tmg
