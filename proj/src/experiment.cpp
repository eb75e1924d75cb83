#include "tmg/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include "tmg/error.hpp"
#include "tmg/hausman.hpp"
#include "tmg/time_effects.hpp"

namespace tmg {

namespace {

std::string fmt_alpha(double a) {
    if (std::abs(a - 1.0 / 3.0) < 1e-12) return "1/3";
    if (std::abs(a - 0.5) < 1e-12) return "1/2";
    std::ostringstream os;
    os << a;
    return os.str();
}

bool is_test(McEstimator k) {
    return k == McEstimator::Hausman || k == McEstimator::HausmanTE;
}

bool has_phi(McEstimator k) {
    return k == McEstimator::FE_TE || k == McEstimator::TMG_TE || k == McEstimator::GP_TE;
}

bool uses_alpha(McEstimator k) {
    return k == McEstimator::TMG || k == McEstimator::TMG_TE || is_test(k);
}

bool uses_alpha_gp(McEstimator k) {
    return k == McEstimator::GP || k == McEstimator::GP_TE;
}

struct Draw {
    bool ok = false;
    double beta = 0.0;
    double beta_se = 0.0;
    double pi = 0.0;
    VectorXd phi;
    VectorXd phi_se;
    double stat = 0.0;
    double p = 1.0;
};

Draw from_estimate(const Estimate& e) {
    Draw d;
    d.ok = true;
    d.beta = e.slopes()(0);
    d.beta_se = std::sqrt(std::max(e.slope_cov()(0, 0), 0.0));
    d.pi = e.pi_n;
    return d;
}

Draw from_te(const Estimate& e, const TimeEffects& te) {
    Draw d = from_estimate(e);
    d.phi = te.phi;
    d.phi_se = te.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    return d;
}

Draw evaluate(const EstimatorSpec& s, const BalancedPanel& panel, const std::vector<UnitDesign>& designs) {
    const TrimConfig cfg = TrimConfig::with_alpha(s.alpha);
    switch (s.kind) {
        case McEstimator::FE: return from_estimate(fe(panel));
        case McEstimator::MG: return from_estimate(mg(panel, designs));
        case McEstimator::TMG: return from_estimate(tmg(panel, designs, cfg));
        case McEstimator::GP: return from_estimate(gp(panel, designs, s.alpha_gp));
        case McEstimator::FE_TE: {
            const FeTeFit f = fete_fit(panel);
            return from_te(f.est, f.te);
        }
        case McEstimator::TMG_TE: {
            const MeanGroupTeFit f = tmg_te_fit(panel, designs, cfg);
            return from_te(f.est, f.te);
        }
        case McEstimator::GP_TE: {
            const MeanGroupTeFit f = gp_te_fit(panel, designs, s.alpha_gp);
            return from_te(f.est, f.te);
        }
        case McEstimator::Hausman:
        case McEstimator::HausmanTE: {
            const HausmanResult h = s.kind == McEstimator::Hausman ? hausman_no_te(panel, designs, cfg)
                                                                    : hausman_te(panel, designs, cfg);
            Draw d;
            d.ok = true;
            d.stat = h.statistic;
            d.p = h.p_value;
            return d;
        }
    }
    return {};
}

std::vector<Draw> run_replication(const DgpConfig& cfg, const std::vector<EstimatorSpec>& specs, int r) {
    const Replication rep = generate_replication(cfg, static_cast<std::uint64_t>(r));
    const std::vector<UnitDesign> designs = build_designs(rep.panel);
    std::vector<Draw> out(specs.size());
    for (std::size_t s = 0; s < specs.size(); ++s) {
        try {
            out[s] = evaluate(specs[s], rep.panel, designs);
        } catch (const Error&) {
            out[s].ok = false;
        }
    }
    return out;
}

// Accumulates estimate errors in replication order.
McResult summarize(const std::string& label, const std::string& target, double truth,
                   const std::vector<double>& est, const std::vector<double>& se, const std::vector<double>& pi,
                   int failures, const std::vector<double>& grid) {
    McResult m;
    m.estimator = label;
    m.target = target;
    m.truth = truth;
    m.failures = failures;
    m.reps = static_cast<int>(est.size());
    if (m.reps == 0) {
        m.bias = m.rmse = m.size = m.pi_hat = m.mc_se_bias = m.mc_se_size = std::nan("");
        return m;
    }
    const double R = m.reps;
    double sum = 0.0, sum2 = 0.0, rejections = 0.0, pi_sum = 0.0;
    for (std::size_t r = 0; r < est.size(); ++r) {
        const double err = est[r] - truth;
        sum += err;
        sum2 += err * err;
        if (std::abs(err) > kNormalCritical * se[r]) rejections += 1.0;
        pi_sum += pi[r];
    }
    m.bias = sum / R;
    m.rmse = std::sqrt(sum2 / R);
    m.size = rejections / R;
    m.pi_hat = pi_sum / R;
    const double var_err = R > 1 ? (sum2 - R * m.bias * m.bias) / (R - 1) : 0.0;
    m.mc_se_bias = std::sqrt(std::max(var_err, 0.0) / R);
    m.mc_se_size = std::sqrt(m.size * (1.0 - m.size) / R);
    for (double b : grid) {
        double rej = 0.0;
        for (std::size_t r = 0; r < est.size(); ++r)
            if (std::abs(est[r] - b) > kNormalCritical * se[r]) rej += 1.0;
        m.power_curve.emplace_back(b, rej / R);
    }
    return m;
}

}  // namespace

std::string EstimatorSpec::label() const {
    std::string base;
    switch (kind) {
        case McEstimator::FE: base = "FE"; break;
        case McEstimator::MG: base = "MG"; break;
        case McEstimator::TMG: base = "TMG"; break;
        case McEstimator::GP: base = "GP"; break;
        case McEstimator::FE_TE: base = "FE-TE"; break;
        case McEstimator::TMG_TE: base = "TMG-TE"; break;
        case McEstimator::GP_TE: base = "GP-TE"; break;
        case McEstimator::Hausman: base = "Hausman"; break;
        case McEstimator::HausmanTE: base = "Hausman-TE"; break;
    }
    if (uses_alpha(kind)) base += "(alpha=" + fmt_alpha(alpha) + ")";
    if (uses_alpha_gp(kind)) base += "(alpha_gp=" + fmt_alpha(alpha_gp) + ")";
    return base;
}

std::string EstimatorSpec::token() const {
    static const char* names[] = {"fe", "mg", "tmg", "gp", "fete", "tmgte", "gpte", "hausman", "hausmante"};
    std::string t = names[static_cast<int>(kind)];
    char buf[40];
    if (uses_alpha(kind)) {
        std::snprintf(buf, sizeof buf, ":%.17g", alpha);
        t += buf;
    } else if (uses_alpha_gp(kind)) {
        std::snprintf(buf, sizeof buf, ":%.17g", alpha_gp);
        t += buf;
    }
    return t;
}

EstimatorSpec EstimatorSpec::parse(const std::string& text) {
    EstimatorSpec s;
    std::string name = text;
    std::optional<double> a;
    if (auto pos = text.find(':'); pos != std::string::npos) {
        name = text.substr(0, pos);
        try {
            a = std::stod(text.substr(pos + 1));
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidConfig, "estimators: bad threshold in '" + text + "'");
        }
    }
    if (name == "fe") s.kind = McEstimator::FE;
    else if (name == "mg") s.kind = McEstimator::MG;
    else if (name == "tmg") s.kind = McEstimator::TMG;
    else if (name == "gp") s.kind = McEstimator::GP;
    else if (name == "fete") s.kind = McEstimator::FE_TE;
    else if (name == "tmgte") s.kind = McEstimator::TMG_TE;
    else if (name == "gpte") s.kind = McEstimator::GP_TE;
    else if (name == "hausman") s.kind = McEstimator::Hausman;
    else if (name == "hausmante") s.kind = McEstimator::HausmanTE;
    else throw Error(ErrorKind::InvalidConfig, "estimators: unknown estimator '" + name + "'");
    if (a) {
        if (!(*a > 0.0 && *a < 1.0)) throw Error(ErrorKind::InvalidConfig, "estimators: threshold must lie in (0,1)");
        if (uses_alpha_gp(s.kind)) s.alpha_gp = *a;
        else s.alpha = *a;
    }
    return s;
}

std::vector<double> default_power_grid(double beta0, int points, double half_width) {
    std::vector<double> g;
    for (int j = 0; j < points; ++j)
        g.push_back(beta0 - half_width + 2.0 * half_width * j / std::max(points - 1, 1));
    return g;
}

CalibrationResult calibrate_kappa(const DgpConfig& cfg_in, int reps, int n_cal, int jobs) {
    cfg_in.validate();
    if (reps < 1 || n_cal < 2) throw Error(ErrorKind::InvalidConfig, "calibration needs reps >= 1 and n >= 2");
    DgpConfig cfg = cfg_in;
    cfg.n = n_cal;
    std::vector<double> a(reps), b(reps);
    auto one = [&](int r) {
        const RegressorDraws xd = generate_regressors(cfg, static_cast<std::uint64_t>(r), StreamDomain::Calibration);
        VectorXd alpha, beta;
        generate_coefficients(cfg, static_cast<std::uint64_t>(r), StreamDomain::Calibration, xd.lambda, alpha, beta);
        const MatrixXd bx = xd.x.array().colwise() * beta.array();
        a[r] = bx.squaredNorm();
        b[r] = bx.sum();
    };
    if (jobs <= 1) {
        for (int r = 0; r < reps; ++r) one(r);
    } else {
#pragma omp parallel for num_threads(jobs) schedule(dynamic)
        for (int r = 0; r < reps; ++r) one(r);
    }
    double sa = 0.0, sb = 0.0;
    for (int r = 0; r < reps; ++r) {
        sa += a[r];
        sb += b[r];
    }
    const double count = static_cast<double>(reps) * n_cal * cfg.T;
    const double A = sa / count;
    const double B = sb / count;
    CalibrationResult out;
    out.var_beta_x = A - B * B;
    out.kappa2 = (1.0 - cfg.pr2) / cfg.pr2 * out.var_beta_x;
    out.reps = reps;
    out.n = n_cal;
    return out;
}

std::vector<McResult> run_experiment(const DgpConfig& cfg, const std::vector<EstimatorSpec>& specs, int reps,
                                     const std::vector<double>& beta0_grid, int jobs) {
    cfg.validate();
    if (reps < 1) throw Error(ErrorKind::InvalidConfig, "reps must be at least 1");
    if (!cfg.kappa2) throw Error(ErrorKind::InvalidConfig, "kappa2: not set; calibrate first");
    std::vector<std::vector<Draw>> draws(reps);
    if (jobs <= 1) {
        for (int r = 0; r < reps; ++r) draws[r] = run_replication(cfg, specs, r);
    } else {
#pragma omp parallel for num_threads(jobs) schedule(dynamic)
        for (int r = 0; r < reps; ++r) draws[r] = run_replication(cfg, specs, r);
    }

    const VectorXd phi = cfg.phi();
    std::vector<McResult> results;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        const std::string label = specs[s].label();
        int failures = 0;
        for (int r = 0; r < reps; ++r) failures += draws[r][s].ok ? 0 : 1;

        if (is_test(specs[s].kind)) {
            McResult m;
            m.estimator = label;
            m.target = "H";
            m.truth = 1.0;  // degrees of freedom: one slope
            m.failures = failures;
            double sum = 0.0, sum2 = 0.0, rej = 0.0;
            for (int r = 0; r < reps; ++r) {
                if (!draws[r][s].ok) continue;
                ++m.reps;
                const double err = draws[r][s].stat - m.truth;
                sum += err;
                sum2 += err * err;
                if (draws[r][s].p < 0.05) rej += 1.0;
            }
            const double R = std::max(m.reps, 1);
            m.bias = sum / R;
            m.rmse = std::sqrt(sum2 / R);
            m.size = rej / R;
            m.mc_se_bias = std::sqrt(std::max(sum2 / R - m.bias * m.bias, 0.0) / R);
            m.mc_se_size = std::sqrt(m.size * (1.0 - m.size) / R);
            results.push_back(std::move(m));
            continue;
        }

        std::vector<double> est, se, pi;
        for (int r = 0; r < reps; ++r)
            if (draws[r][s].ok) {
                est.push_back(draws[r][s].beta);
                se.push_back(draws[r][s].beta_se);
                pi.push_back(draws[r][s].pi);
            }
        results.push_back(summarize(label, "beta1", cfg.beta0, est, se, pi, failures, beta0_grid));

        if (has_phi(specs[s].kind)) {
            for (int t = 0; t + 1 < cfg.T; ++t) {
                std::vector<double> pe, ps;
                for (int r = 0; r < reps; ++r)
                    if (draws[r][s].ok) {
                        pe.push_back(draws[r][s].phi(t));
                        ps.push_back(draws[r][s].phi_se(t));
                    }
                results.push_back(
                    summarize(label, "phi" + std::to_string(t + 1), phi(t), pe, ps, pi, failures, {}));
            }
        }
    }
    return results;
}

}  // namespace tmg
