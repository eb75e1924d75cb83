#include "helpers.hpp"
#include "tmg/design.hpp"
#include "tmg/error.hpp"
#include "tmg/trimming.hpp"

using namespace tmg;

TEST_CASE("compute_threshold examples") {
    const VectorXd ones = VectorXd::Ones(4);
    const long double expected = std::cbrt(0.25L);
    CHECK(std::abs(compute_threshold(ones, TrimConfig::with_alpha(1.0 / 3.0)) - static_cast<double>(expected)) <= 1e-15);
    CHECK(compute_threshold(ones, TrimConfig::with_alpha(1.0 / 3.0)) == doctest::Approx(0.6300).epsilon(1e-4));

    CHECK(compute_threshold(VectorXd::Ones(8), TrimConfig::explicit_scale(0.5, 2.0)) ==
          doctest::Approx(2.0 / std::sqrt(8.0)).epsilon(1e-15));

    VectorXd d(5);
    d << 0.1, 2.0, 3.5, 0.0, 1.2;
    const double a = compute_threshold(d, {});
    CHECK(compute_threshold(d * 7.5, {}) == doctest::Approx(7.5 * a).epsilon(1e-14));

    try {
        compute_threshold(VectorXd::Zero(3), {});
        FAIL("expected AllSingular");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AllSingular);
    }
}

TEST_CASE("TrimConfig validation") {
    for (double a : {0.0, 1.0, -0.2, 1.5}) CHECK_THROWS_AS(TrimConfig::with_alpha(a).validate(), Error);
    CHECK_THROWS_AS(TrimConfig::explicit_scale(0.5, 0.0).validate(), Error);
    CHECK_NOTHROW(TrimConfig::with_alpha(0.35).validate());
}

TEST_CASE("delta_weights examples and identities") {
    const double a = 0.8;
    VectorXd d(5);
    d << 2 * a, a / 2, 0.0, a, 3.0;
    const TrimState s = delta_weights(d, a);
    CHECK(s.delta(0) == 0.0);
    CHECK(s.delta(1) == -0.5);
    CHECK(s.delta(2) == -1.0);
    CHECK(s.delta(3) == 0.0);
    CHECK(s.trimmed[3] == 1);  // tie is trimmed
    CHECK(s.trimmed[0] == 0);
    CHECK(s.pi_n == doctest::Approx(0.6));
    CHECK(s.delta_bar == doctest::Approx(-0.3));
    for (int i = 0; i < d.size(); ++i) {
        const double lhs = (1 + s.delta(i)) * (1 + s.delta(i));
        const double rhs = d(i) > a ? 1.0 : d(i) * d(i) / (a * a);
        CHECK(lhs == rhs);
        CHECK(s.delta(i) >= -1.0);
        CHECK(s.delta(i) <= 0.0);
    }
}

TEST_CASE("delta is monotone and weights normalize") {
    std::mt19937_64 rng(31);
    std::exponential_distribution<double> ex(1.0);
    for (int rep = 0; rep < 20; ++rep) {
        VectorXd d(40);
        for (auto& v : d) v = ex(rng);
        const double a = compute_threshold(d, {});
        const TrimState s = delta_weights(d, a);
        CHECK(std::abs(s.normalized_weights().sum() - 1.0) <= 1e-12);
        std::vector<int> idx(40);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int x, int y) { return d(x) < d(y); });
        for (int j = 1; j < 40; ++j) CHECK(s.delta(idx[j]) >= s.delta(idx[j - 1]));
        CHECK(1.0 + s.delta_bar > 0.0);
    }
}

TEST_CASE("trimmed_unit_estimate branches") {
    std::mt19937_64 rng(37);
    int trimmed_seen = 0;
    for (int rep = 0; rep < 40; ++rep) {
        const BalancedPanel p = testutil::make_panel(rng, 2, 2 + rep % 3, 1);
        const UnitDesign u = build_unit_design(p, 0);
        const VectorXd y = p.y(0);
        // untrimmed branch: identical to OLS
        CHECK(trimmed_unit_estimate(u, y, 0.5 * u.d) == unit_ols(u, y));
        // trimmed branch agrees with (d/a) * OLS
        const double a = u.d * (1.0 + rep);
        const VectorXd lhs = trimmed_unit_estimate(u, y, a);
        const VectorXd rhs = (u.d / a) * unit_ols(u, y);
        CHECK(testutil::rel_err(lhs, rhs) <= 1e-10);
        ++trimmed_seen;
    }
    CHECK(trimmed_seen == 40);

    const BalancedPanel flat(2, 2, VectorXd::Zero(4), (MatrixXd(4, 1) << 1, 1, 0, 1).finished());
    const UnitDesign z = build_unit_design(flat, 0);
    CHECK(trimmed_unit_estimate(z, flat.y(0), 0.3).isZero(0.0));
}

TEST_CASE("trimming set is invariant to regressor rescaling") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        const BalancedPanel p = testutil::make_panel(rng, 60, 2 + rep % 2, 1);
        const TrimState a = trim(build_designs(p), {});
        for (double c : {0.01, 3.0, 250.0}) {
            const TrimState b = trim(build_designs(testutil::with_x(p, p.x_all() * c)), {});
            CHECK(a.trimmed == b.trimmed);
            CHECK(a.pi_n == b.pi_n);
            CHECK(testutil::max_abs(a.delta - b.delta) <= 1e-12);
        }
    }
}
