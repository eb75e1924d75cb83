#include "helpers.hpp"
#include "tmg/design.hpp"
#include "tmg/dgp.hpp"
#include "tmg/error.hpp"
#include "tmg/experiment.hpp"

using namespace tmg;
using testutil::max_abs;

namespace {

DgpConfig small(int n, int T) {
    DgpConfig c;
    c.n = n;
    c.T = T;
    c.kappa2 = 15.5;
    return c;
}

bool same(const McResult& a, const McResult& b) {
    auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.estimator == b.estimator && a.target == b.target && a.reps == b.reps && a.failures == b.failures &&
           eq(a.bias, b.bias) && eq(a.rmse, b.rmse) && eq(a.size, b.size) && eq(a.pi_hat, b.pi_hat) &&
           eq(a.mc_se_bias, b.mc_se_bias) && eq(a.mc_se_size, b.mc_se_size) && a.power_curve == b.power_curve;
}

}  // namespace

TEST_CASE("degenerate noise gives an exact linear outcome") {
    DgpConfig c = small(50, 4);
    c.sigma2_alpha = c.sigma2_beta = 0.0;
    c.kappa2 = 0.0;
    c.time_effects = true;
    const Replication r = generate_replication(c, 3);
    const VectorXd phi = c.phi();
    CHECK(phi.sum() == 0.0);
    CHECK(phi(0) == 1.0);
    CHECK(phi(3) == -6.0);
    for (int i = 0; i < c.n; ++i)
        for (int t = 0; t < c.T; ++t)
            CHECK(r.panel.y(i)(t) == doctest::Approx(1.0 + phi(t) + r.panel.X(i)(t, 0)).epsilon(1e-15));
}

TEST_CASE("lambda construction") {
    DgpConfig c = small(200, 2);
    const RegressorDraws d = generate_regressors(c, 0, StreamDomain::Experiment);
    for (int i = 0; i < c.n; ++i) {
        const double diff = d.e_x(i, 1) - d.e_x(i, 0);
        const double emse = 0.5 * diff * diff;  // e'M e at T = 2
        CHECK(d.lambda(i) == doctest::Approx((emse - 1.0) / std::sqrt(2.0)).epsilon(1e-12));
    }

    // without AR dynamics or factors lambda is a standardized determinant
    for (int T : {2, 3, 5}) {
        DgpConfig s = small(100, T);
        s.rho_ix_mode = DgpConfig::ArMode::Zero;
        s.time_effects = false;
        const Replication r = generate_replication(s, 1);
        const auto designs = build_designs(r.panel);
        const double sd = std::sqrt(2.0 * (T - 1));
        for (int i = 0; i < s.n; ++i) {
            const double q = designs[i].d / (T * r.truth.sigma2_x(i));
            CHECK(std::abs((q - (T - 1)) / sd - r.truth.lambda(i)) <= 1e-10 * (1.0 + std::abs(r.truth.lambda(i))));
        }
    }
}

TEST_CASE("lambda has zero mean and unit variance") {
    for (auto dist : {DgpConfig::XError::Gaussian, DgpConfig::XError::UniformScaled})
        for (int T : {2, 4}) {
            DgpConfig c = small(100000, T);
            c.x_error_dist = dist;
            c.burn_in = 1;
            const VectorXd l = generate_regressors(c, 0, StreamDomain::Calibration).lambda;
            const double m = l.mean();
            const double v = (l.array() - m).square().mean();
            const double se_m = std::sqrt(v / l.size());
            const double se_v = std::sqrt(((l.array() - m).square() - v).square().mean() / l.size());
            CHECK(std::abs(m) <= 3 * se_m);
            CHECK(std::abs(v - 1.0) <= 3 * se_v);
        }
}

TEST_CASE("coefficient moments match their targets") {
    DgpConfig c = small(1000000, 2);
    c.burn_in = 1;
    const VectorXd lam = generate_regressors(c, 0, StreamDomain::Calibration).lambda;
    VectorXd a, b;
    generate_coefficients(c, 0, StreamDomain::Calibration, lam, a, b);
    const double bm = b.mean();
    const VectorXd bc = b.array() - bm;
    const double var = bc.squaredNorm() / b.size();
    const double se_var = std::sqrt((bc.array().square() - var).square().mean() / b.size());
    CHECK(std::abs(var - c.sigma2_beta) <= 3 * se_var);
    const VectorXd lc = lam.array() - lam.mean();
    const double corr = bc.dot(lc) / std::sqrt(bc.squaredNorm() * lc.squaredNorm());
    // delta-method standard error from the standardized cross products
    const VectorXd zb = bc / std::sqrt(var);
    const VectorXd zl = lc / std::sqrt(lc.squaredNorm() / lam.size());
    const VectorXd infl = zb.cwiseProduct(zl) - 0.5 * corr * (zb.array().square() + zl.array().square()).matrix();
    const double se_corr = std::sqrt(infl.squaredNorm() / lam.size() / lam.size());
    CHECK(std::abs(corr - c.rho_beta) <= 3 * se_corr);
    CHECK(std::abs(b.mean() - c.beta0) <= 3 * std::sqrt(var / b.size()));
}

TEST_CASE("calibrated kappa reproduces the target fit") {
    DgpConfig c = small(5000, 2);
    c.kappa2.reset();
    const CalibrationResult cal = calibrate_kappa(c, 300, 5000);
    c.kappa2 = cal.kappa2;
    FitMoments fm;
    for (int r = 0; r < 200; ++r) fm.add(generate_replication(c, r));
    CHECK(std::abs(fm.pr2() - c.pr2) <= 0.01);
}

TEST_CASE("homogeneous slopes give the analytic kappa") {
    // beta_i = 1: kappa^2 = 4 Var(x); Var(x) = E sigma^2 + Var(alpha_x) = 2 for stationary AR(1)
    DgpConfig c = small(5000, 2);
    c.sigma2_beta = 0.0;
    c.rho_beta = 0.0;
    const CalibrationResult cal = calibrate_kappa(c, 200, 5000);
    CHECK(cal.kappa2 == doctest::Approx(8.0).epsilon(0.02));
}

TEST_CASE("noiseless homogeneous experiment has zero bias and RMSE") {
    for (bool te : {false, true}) {
        DgpConfig c = small(200, 3);
        c.sigma2_alpha = c.sigma2_beta = 0.0;
        c.kappa2 = 0.0;
        c.time_effects = te;
        std::vector<EstimatorSpec> specs;
        for (auto s : te ? std::vector<const char*>{"fete", "tmgte", "gpte"}
                         : std::vector<const char*>{"fe", "mg", "tmg", "gp"})
            specs.push_back(EstimatorSpec::parse(s));
        for (const auto& m : run_experiment(c, specs, 5)) {
            CHECK(m.failures == 0);
            CHECK(std::abs(m.bias) <= 1e-9);
            CHECK(m.rmse <= 1e-9);
        }
    }
}

TEST_CASE("results do not depend on the worker count") {
    DgpConfig c = small(300, 2);
    c.time_effects = true;
    std::vector<EstimatorSpec> specs;
    for (auto s : {"fe", "mg", "tmg", "gp:0.4", "tmgte", "hausman", "hausmante"}) specs.push_back(EstimatorSpec::parse(s));
    const auto grid = default_power_grid(1.0, 5, 0.5);
    const auto a = run_experiment(c, specs, 24, grid, 1);
    const auto b = run_experiment(c, specs, 24, grid, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(same(a[i], b[i]));
    const auto cal1 = calibrate_kappa(c, 20, 500, 1);
    const auto cal4 = calibrate_kappa(c, 20, 500, 3);
    CHECK(cal1.kappa2 == cal4.kappa2);

    DgpConfig d = c;
    d.seed += 1;
    CHECK(run_experiment(d, specs, 24, grid, 1)[0].bias != a[0].bias);
}

TEST_CASE("aggregate invariants") {
    DgpConfig c = small(150, 2);
    std::vector<EstimatorSpec> specs{EstimatorSpec::parse("mg"), EstimatorSpec::parse("tmg"),
                                     EstimatorSpec::parse("hausman")};
    const auto res = run_experiment(c, specs, 60, default_power_grid(1.0));
    for (const auto& m : res) {
        CHECK(m.reps + m.failures == 60);
        CHECK(m.size >= 0.0);
        CHECK(m.size <= 1.0);
        CHECK(m.rmse >= std::abs(m.bias));
        CHECK(m.mc_se_size == doctest::Approx(std::sqrt(m.size * (1 - m.size) / m.reps)));
    }
    CHECK(res[1].power_curve.size() == 21);
    CHECK(res[1].pi_hat > 0.0);
    CHECK(res[2].target == "H");
}

TEST_CASE("estimator spec parsing") {
    const EstimatorSpec t = EstimatorSpec::parse("tmg:0.5");
    CHECK(t.kind == McEstimator::TMG);
    CHECK(t.alpha == 0.5);
    CHECK(t.label() == "TMG(alpha=1/2)");
    CHECK(EstimatorSpec::parse(t.token()).alpha == 0.5);
    CHECK(EstimatorSpec::parse("gp:0.25").alpha_gp == 0.25);
    CHECK(EstimatorSpec::parse("tmg").label() == "TMG(alpha=1/3)");
    CHECK_THROWS_AS(EstimatorSpec::parse("ols"), Error);
    CHECK_THROWS_AS(EstimatorSpec::parse("tmg:2"), Error);
    CHECK_THROWS_AS(EstimatorSpec::parse("tmg:x"), Error);
}

TEST_CASE("default power grid") {
    const auto g = default_power_grid(1.0);
    REQUIRE(g.size() == 21);
    CHECK(g.front() == doctest::Approx(0.5));
    CHECK(g.back() == doctest::Approx(1.5));
    CHECK(g[10] == doctest::Approx(1.0));
}

TEST_CASE("config validation") {
    DgpConfig c;
    c.rho_beta = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = DgpConfig{};
    c.pr2 = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = DgpConfig{};
    CHECK_THROWS_AS(generate_replication(c, 0), Error);  // kappa2 missing
    CHECK(c.sigma2_eps_beta() == doctest::Approx(0.75 * 0.5));
    CHECK(c.psi_beta() == doctest::Approx(0.5 * std::sqrt(0.5)));
}
