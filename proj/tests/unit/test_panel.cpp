#include <sstream>

#include "helpers.hpp"
#include "tmg/design.hpp"
#include "tmg/error.hpp"

using namespace tmg;
using testutil::rel_err;

namespace {

std::vector<PanelRecord> two_by_three() {
    return {{"a", "1", 1.0, {0.0}}, {"a", "2", 2.0, {1.0}}, {"a", "3", 2.5, {3.0}},
            {"b", "1", 0.5, {1.0}}, {"b", "2", 1.5, {0.5}}, {"b", "3", 4.0, {2.0}}};
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::ParseError;
}

}  // namespace

TEST_CASE("load_panel: complete 2x3 stream") {
    auto rows = two_by_three();
    std::reverse(rows.begin(), rows.end());
    const BalancedPanel p = load_panel(rows);
    CHECK(p.n() == 2);
    CHECK(p.T() == 3);
    CHECK(p.k_prime() == 1);
    CHECK(p.unit_ids() == std::vector<std::string>{"a", "b"});
    CHECK(p.y(0)(2) == 2.5);
    CHECK(p.X(1)(0, 0) == 1.0);
}

TEST_CASE("load_panel: input errors") {
    auto rows = two_by_three();
    rows.erase(rows.begin() + 4);
    CHECK(kind_of([&] { load_panel(rows); }) == ErrorKind::UnbalancedPanel);

    rows = two_by_three();
    rows.push_back(rows[0]);
    CHECK(kind_of([&] { load_panel(rows); }) == ErrorKind::DuplicateCell);

    rows = two_by_three();
    rows[3].y = std::nan("");
    CHECK(kind_of([&] { load_panel(rows); }) == ErrorKind::NonFiniteValue);

    rows = {{"a", "1", 1.0, {0.0, 1.0}}, {"a", "2", 1.0, {1.0, 0.0}}, {"b", "1", 1.0, {2.0, 1.0}},
            {"b", "2", 1.0, {1.0, 1.0}}};
    CHECK(kind_of([&] { load_panel(rows); }) == ErrorKind::TooFewPeriods);

    CHECK(kind_of([&] { load_panel({}); }) == ErrorKind::ParseError);
}

TEST_CASE("read_panel_csv: header, order, numeric labels") {
    std::istringstream in("\xEF\xBB\xBFunit_id,time_id,y,x1\n10,2002,1.5,2\n9,2001,0,1\n10,2001,1,1\n9,2002,2,3\n");
    const BalancedPanel p = load_panel(read_panel_csv(in));
    CHECK(p.unit_ids() == std::vector<std::string>{"9", "10"});
    CHECK(p.time_ids() == std::vector<std::string>{"2001", "2002"});
    CHECK(p.y(1)(1) == 1.5);

    std::istringstream bad("id,time,y,x\n1,1,1,1\n");
    CHECK(kind_of([&] { read_panel_csv(bad); }) == ErrorKind::ParseError);
    std::istringstream junk("unit_id,time_id,y,x1\n1,1,abc,1\n");
    CHECK(kind_of([&] { read_panel_csv(junk); }) == ErrorKind::ParseError);
}

TEST_CASE("read_panel_csv: household-survey shaped file with 1358 units and 2 periods") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    std::ostringstream os;
    os << "unit_id,time_id,y,x1\n";
    for (int i = 0; i < 1358; ++i)
        for (int t : {2001, 2002}) os << "hh" << i << ',' << t << ',' << z(rng) << ',' << z(rng) << '\n';
    std::istringstream in(os.str());
    const BalancedPanel p = load_panel(read_panel_csv(in));
    CHECK(p.n() == 1358);
    CHECK(p.T() == 2);
    CHECK(p.k_prime() == 1);
}

TEST_CASE("write_panel_csv round-trips exactly") {
    std::mt19937_64 rng(5);
    const BalancedPanel p = testutil::make_panel(rng, 6, 3, 2);
    std::stringstream s;
    write_panel_csv(s, p);
    const BalancedPanel q = load_panel(read_panel_csv(s));
    CHECK(q.y_all() == p.y_all());
    CHECK(q.x_all() == p.x_all());
}

TEST_CASE("build_unit_design: worked examples") {
    {
        const BalancedPanel p(2, 2, VectorXd::Zero(4), (MatrixXd(4, 1) << 0, 0, 0, 1).finished());
        const UnitDesign u = build_unit_design(p, 0);
        CHECK(u.d == 0.0);
        CHECK(u.singular());
        CHECK(u.adj.allFinite());
        const UnitDesign v = build_unit_design(p, 1);
        CHECK(v.gram == (MatrixXd(2, 2) << 2, 1, 1, 1).finished());
        CHECK(v.d == doctest::Approx(1.0).epsilon(1e-15));
    }
    std::mt19937_64 rng(11);
    const BalancedPanel p = testutil::make_panel(rng, 1 + 1, 4, 2);
    const double c = 1.7;
    const BalancedPanel q = testutil::with_x(p, p.x_all() * c);
    const UnitDesign a = build_unit_design(p, 0);
    const UnitDesign b = build_unit_design(q, 0);
    CHECK(b.d == doctest::Approx(a.d * std::pow(c, 4)).epsilon(1e-12));
}

TEST_CASE("design invariants on random fixtures") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        const int kp = 1 + rep % 4;
        const int T = kp + 1 + rep % 3;
        const BalancedPanel p = testutil::make_panel(rng, 3, T, kp);
        for (int i = 0; i < p.n(); ++i) {
            const UnitDesign u = build_unit_design(p, i);
            const int k = u.k();
            // adjugate identity
            const double scale = testutil::max_abs(u.gram) * std::max(u.d_raw, 1.0);
            CHECK(testutil::max_abs(u.gram * u.adj - u.d_raw * MatrixXd::Identity(k, k)) <= 1e-10 * scale);
            CHECK(testutil::max_abs(u.adj * u.gram - u.d_raw * MatrixXd::Identity(k, k)) <= 1e-10 * scale);
            CHECK(u.d >= 0.0);
            CHECK(u.gram == u.gram.transpose());
            // independent dense determinant
            CHECK(u.d == doctest::Approx(u.gram.fullPivLu().determinant()).epsilon(1e-10));
            if (T == k) CHECK(u.d == doctest::Approx(std::pow(u.W.determinant(), 2)).epsilon(1e-10));
            // permutation of rows leaves d unchanged
            MatrixXd perm = u.W.colwise().reverse();
            CHECK(determinant(perm.transpose() * perm) == doctest::Approx(u.d).epsilon(1e-10));
            // unit OLS vs QR least squares
            const VectorXd y = p.y(i);
            const VectorXd theta = unit_ols(u, y);
            const VectorXd ref = u.W.colPivHouseholderQr().solve(y);
            CHECK(rel_err(theta, ref) <= 1e-9);
            const VectorXd resid = y - u.W * theta;
            CHECK(testutil::max_abs(u.W.transpose() * resid) <= 1e-9 * (1.0 + testutil::max_abs(u.W.transpose() * y)));
        }
    }
}

TEST_CASE("determinant and adjugate beyond the cofactor range") {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> z;
    for (int m : {5, 6}) {
        MatrixXd a(m, m);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) a(r, c) = z(rng);
        const double d = determinant(a);
        CHECK(d == doctest::Approx(a.determinant()).epsilon(1e-10));
        CHECK(testutil::max_abs(a * adjugate(a) - d * MatrixXd::Identity(m, m)) <= 1e-10 * testutil::max_abs(a));
    }
}

TEST_CASE("unit_ols examples") {
    const BalancedPanel exact(1 + 1, 3, (VectorXd(6) << 1, 3, 5, 2, 3, 4).finished(),
                              (MatrixXd(6, 1) << 0, 1, 2, 1, 2, 3).finished());
    const VectorXd th = unit_ols(build_unit_design(exact, 0), exact.y(0));
    CHECK(th(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(th(1) == doctest::Approx(2.0).epsilon(1e-12));
    const VectorXd th2 = unit_ols(build_unit_design(exact, 1), exact.y(1));
    CHECK(std::abs(th2(0) - 1.0) <= 1e-12);
    CHECK(std::abs(th2(1) - 1.0) <= 1e-12);

    const BalancedPanel flat(2, 2, VectorXd::Ones(4), (MatrixXd(4, 1) << 1, 1, 0, 1).finished());
    CHECK(kind_of([&] { unit_ols(build_unit_design(flat, 0), flat.y(0)); }) == ErrorKind::SingularDesign);
}

TEST_CASE("singularity floor zeroes round-off determinants") {
    // collinear within a relative 1e-9 perturbation: d_raw is tiny but positive
    MatrixXd x(4, 1);
    x << 1e6, 1e6 + 1e-4, 0.0, 1.0;
    const BalancedPanel p(2, 2, VectorXd::Zero(4), x);
    const UnitDesign u = build_unit_design(p, 0);
    CHECK(u.d == 0.0);
    CHECK(build_unit_design(p, 1).d > 0.0);
}

TEST_CASE("within operator") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> z;
    for (int T : {2, 3, 7}) {
        VectorXd v(T);
        for (int t = 0; t < T; ++t) v(t) = 10.0 * z(rng);
        const VectorXd w = within(v);
        CHECK(std::abs(w.sum()) <= 1e-12 * v.cwiseAbs().sum());
        CHECK(testutil::max_abs(within(w) - w) <= 1e-12 * testutil::max_abs(v));
        CHECK(testutil::max_abs(within(VectorXd(VectorXd::Constant(T, 3.2)))) <= 1e-15);
    }
}

TEST_CASE("panel constructor invariants") {
    CHECK(kind_of([] { BalancedPanel(1, 2, VectorXd::Zero(2), MatrixXd::Zero(2, 1)); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([] { BalancedPanel(2, 1, VectorXd::Zero(2), MatrixXd::Zero(2, 1)); }) == ErrorKind::TooFewPeriods);
    VectorXd y = VectorXd::Zero(4);
    y(2) = std::numeric_limits<double>::infinity();
    CHECK(kind_of([&] { BalancedPanel(2, 2, y, MatrixXd::Zero(4, 1)); }) == ErrorKind::NonFiniteValue);
}

TEST_CASE("parallel and serial design builds agree bitwise") {
    std::mt19937_64 rng(29);
    const BalancedPanel p = testutil::make_panel(rng, 500, 3, 1);
    const auto a = build_designs(p, Exec::Serial);
    const auto b = build_designs(p, Exec::Parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].d == b[i].d);
        CHECK(a[i].adj == b[i].adj);
    }
}
