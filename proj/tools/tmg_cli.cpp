#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "tmg/error.hpp"
#include "tmg/experiment.hpp"
#include "tmg/hausman.hpp"
#include "tmg/io.hpp"
#include "tmg/time_effects.hpp"

namespace fs = std::filesystem;
using namespace tmg;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::ParseError, "cannot write '" + p.string() + "'");
    return f;
}

void write_manifest(const fs::path& dir, RunManifest m) {
    m.outputs["manifest"] = (dir / "manifest.json").string();
    auto f = open_out(dir / "manifest.json");
    f << manifest_to_json(m).dump(2) << '\n';
}

std::vector<std::string> x_names(const BalancedPanel& p) {
    std::vector<std::string> names;
    for (int j = 0; j < p.k_prime(); ++j) names.push_back("x" + std::to_string(j + 1));
    return names;
}

void print_table(const std::vector<CoefRow>& rows, const Estimate& est) {
    std::printf("%-12s %14s %12s %9s %9s\n", "term", "estimate", "se", "t", "p");
    for (const auto& r : rows)
        std::printf("%-12s %14.6f %12.6f %9.3f %9.4f\n", r.term.c_str(), r.estimate, r.se, r.t, r.p_value);
    std::printf("method %s  n_used %d  pi_n %.4f\n", to_string(est.method), est.n_used, est.pi_n);
}

struct Common {
    double alpha = 1.0 / 3.0;
    double alpha_gp = 1.0 / 3.0;
    std::string out = "tmg-out";
};

struct EstimateArgs {
    std::string csv;
    std::string method = "tmg";
    bool te = false;
    std::string per_unit;
};

int run_estimate(const EstimateArgs& a, const Common& c) {
    const auto t0 = Clock::now();
    const BalancedPanel panel = load_panel_csv(a.csv);
    const auto t_load = seconds_since(t0);
    TrimConfig cfg = TrimConfig::with_alpha(c.alpha);
    cfg.validate();
    if (!(c.alpha_gp > 0.0 && c.alpha_gp < 1.0))
        throw Error(ErrorKind::InvalidConfig, "--alpha-gp must lie in (0,1)");

    std::string method = a.method;
    if (a.te) {
        if (method == "fe") method = "fete";
        else if (method == "tmg") method = "tmgte";
        else if (method == "gp") method = "gpte";
        else if (method == "mg") throw Error(ErrorKind::InvalidConfig, "--te is not available for mg");
    }
    const auto designs = build_designs(panel);
    Estimate est;
    std::optional<TimeEffects> te;
    if (method == "fe") est = fe(panel);
    else if (method == "mg") est = mg(panel, designs);
    else if (method == "tmg") est = tmg::tmg(panel, designs, cfg);
    else if (method == "gp") est = gp(panel, designs, c.alpha_gp);
    else if (method == "fete") {
        auto f = fete_fit(panel);
        est = f.est;
        te = f.te;
    } else if (method == "tmgte") {
        auto f = tmg_te_fit(panel, designs, cfg);
        est = f.est;
        te = f.te;
    } else if (method == "gpte") {
        auto f = gp_te_fit(panel, designs, c.alpha_gp);
        est = f.est;
        te = f.te;
    }

    const auto rows = coefficient_table(est, x_names(panel), te ? &*te : nullptr);
    print_table(rows, est);

    fs::create_directories(c.out);
    const fs::path dir(c.out);
    RunManifest m;
    m.command = "estimate";
    m.alpha = c.alpha;
    m.alpha_gp = c.alpha_gp;
    m.extra["input"] = a.csv;
    m.extra["method"] = method;
    m.extra["n"] = panel.n();
    m.extra["T"] = panel.T();
    {
        auto f = open_out(dir / "estimate.csv");
        write_coefficient_csv(f, rows, est);
    }
    m.outputs["estimate"] = (dir / "estimate.csv").string();
    if (!a.per_unit.empty()) {
        auto f = open_out(a.per_unit);
        write_per_unit_csv(f, est, panel.unit_ids());
        m.outputs["per_unit"] = a.per_unit;
    }
    m.timings["load"] = t_load;
    m.timings["total"] = seconds_since(t0);
    write_manifest(dir, m);
    return 0;
}

struct TestArgs {
    std::string csv;
    bool te = false;
};

int run_test(const TestArgs& a, const Common& c) {
    const auto t0 = Clock::now();
    const BalancedPanel panel = load_panel_csv(a.csv);
    TrimConfig cfg = TrimConfig::with_alpha(c.alpha);
    cfg.validate();
    const auto designs = build_designs(panel);
    const HausmanResult h = a.te ? hausman_te(panel, designs, cfg) : hausman_no_te(panel, designs, cfg);
    std::printf("variant %s  statistic %.6f  df %d  p_value %.6g\n", to_string(h.variant), h.statistic, h.df,
                h.p_value);

    fs::create_directories(c.out);
    const fs::path dir(c.out);
    {
        auto f = open_out(dir / "hausman.csv");
        write_hausman_csv(f, h);
    }
    RunManifest m;
    m.command = "test";
    m.alpha = c.alpha;
    m.alpha_gp = c.alpha_gp;
    m.extra["input"] = a.csv;
    m.extra["te"] = a.te;
    m.outputs["hausman"] = (dir / "hausman.csv").string();
    m.timings["total"] = seconds_since(t0);
    write_manifest(dir, m);
    return 0;
}

struct McArgs {
    std::string scenario;
    std::optional<int> reps;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool alpha_set = false;
    bool alpha_gp_set = false;
};

Scenario prepare(const McArgs& a, const Common& c) {
    Scenario s = load_scenario(a.scenario);
    if (a.reps) {
        if (*a.reps < 1) throw Error(ErrorKind::InvalidConfig, "--reps must be at least 1");
        s.reps = *a.reps;
    }
    if (a.seed) s.cfg.seed = *a.seed;
    if (a.jobs < 1) throw Error(ErrorKind::InvalidConfig, "--jobs must be at least 1");
    for (auto& e : s.estimators) {
        if (a.alpha_set) e.alpha = c.alpha;
        if (a.alpha_gp_set) e.alpha_gp = c.alpha_gp;
    }
    return s;
}

RunManifest mc_manifest(const std::string& cmd, const Scenario& s, const McArgs& a, const Common& c) {
    RunManifest m;
    m.command = cmd;
    m.config_hash = config_hash(s.cfg);
    m.seed = s.cfg.seed;
    m.reps = s.reps;
    m.jobs = a.jobs;
    m.alpha = c.alpha;
    m.alpha_gp = c.alpha_gp;
    m.extra["scenario"] = scenario_to_json(s);
    m.extra["scenario_path"] = a.scenario;
    return m;
}

// Fills kappa2 by calibration when the scenario does not pin it.
void ensure_kappa(Scenario& s, int jobs, RunManifest& m) {
    if (s.cfg.kappa2) return;
    const auto t0 = Clock::now();
    const CalibrationResult cal = calibrate_kappa(s.cfg, s.calib_reps, s.calib_n, jobs);
    s.cfg.kappa2 = cal.kappa2;
    m.timings["calibrate"] = seconds_since(t0);
    m.extra["kappa2_calibrated"] = cal.kappa2;
    m.config_hash = config_hash(s.cfg);
}

int run_simulate(const McArgs& a, const Common& c) {
    const auto t0 = Clock::now();
    Scenario s = prepare(a, c);
    RunManifest m = mc_manifest("simulate", s, a, c);
    ensure_kappa(s, a.jobs, m);
    const auto t1 = Clock::now();
    const auto results = run_experiment(s.cfg, s.estimators, s.reps, {}, a.jobs);
    m.timings["replications"] = seconds_since(t1);

    std::printf("%-24s %-6s %6s %6s %10s %10s %8s %8s\n", "estimator", "target", "reps", "fail", "bias", "rmse",
                "size", "pi_hat");
    for (const auto& r : results)
        std::printf("%-24s %-6s %6d %6d %10.4f %10.4f %8.3f %8.3f\n", r.estimator.c_str(), r.target.c_str(), r.reps,
                    r.failures, r.bias, r.rmse, r.size, r.pi_hat);

    fs::create_directories(c.out);
    const fs::path dir(c.out);
    {
        auto f = open_out(dir / "results.csv");
        write_results_csv(f, results);
    }
    m.outputs["results"] = (dir / "results.csv").string();
    m.timings["total"] = seconds_since(t0);
    write_manifest(dir, m);
    return 0;
}

struct CalibrateArgs {
    std::optional<int> n_cal;
};

int run_calibrate(const McArgs& a, const CalibrateArgs& ca, const Common& c) {
    const auto t0 = Clock::now();
    Scenario s = prepare(a, c);
    const int reps = a.reps ? *a.reps : s.calib_reps;
    const int n_cal = ca.n_cal ? *ca.n_cal : s.calib_n;
    const CalibrationResult cal = calibrate_kappa(s.cfg, reps, n_cal, a.jobs);
    std::printf("kappa2 %.6f  var(beta x) %.6f  reps %d  n %d  T %d\n", cal.kappa2, cal.var_beta_x, cal.reps, cal.n,
                s.cfg.T);

    fs::create_directories(c.out);
    const fs::path dir(c.out);
    nlohmann::json rec;
    rec["kappa2"] = cal.kappa2;
    rec["var_beta_x"] = cal.var_beta_x;
    rec["reps"] = cal.reps;
    rec["n"] = cal.n;
    rec["T"] = s.cfg.T;
    rec["pr2"] = s.cfg.pr2;
    rec["config_hash"] = config_hash(s.cfg);
    {
        auto f = open_out(dir / "calibration.json");
        f << rec.dump(2) << '\n';
    }
    Scenario filled = s;
    filled.cfg.kappa2 = cal.kappa2;
    {
        auto f = open_out(dir / "scenario_calibrated.json");
        f << scenario_to_json(filled).dump(2) << '\n';
    }
    RunManifest m = mc_manifest("calibrate", s, a, c);
    m.reps = reps;
    m.outputs["calibration"] = (dir / "calibration.json").string();
    m.outputs["scenario"] = (dir / "scenario_calibrated.json").string();
    m.timings["total"] = seconds_since(t0);
    write_manifest(dir, m);
    return 0;
}

struct PowerArgs {
    std::string method;
    double lo = std::nan("");
    double hi = std::nan("");
    int points = 21;
};

int run_power(const McArgs& a, const PowerArgs& pa, const Common& c) {
    const auto t0 = Clock::now();
    Scenario s = prepare(a, c);
    std::vector<EstimatorSpec> specs = s.estimators;
    if (!pa.method.empty()) {
        EstimatorSpec e = EstimatorSpec::parse(pa.method);
        if (a.alpha_set) e.alpha = c.alpha;
        if (a.alpha_gp_set) e.alpha_gp = c.alpha_gp;
        specs = {e};
    }
    for (const auto& e : specs)
        if (e.kind == McEstimator::Hausman || e.kind == McEstimator::HausmanTE)
            throw Error(ErrorKind::InvalidConfig, "power curves apply to coefficient estimators, not to " + e.label());
    if (pa.points < 2) throw Error(ErrorKind::InvalidConfig, "--grid-points must be at least 2");
    std::vector<double> grid = default_power_grid(s.cfg.beta0, pa.points, 0.5);
    if (!std::isnan(pa.lo) || !std::isnan(pa.hi)) {
        const double lo = std::isnan(pa.lo) ? s.cfg.beta0 - 0.5 : pa.lo;
        const double hi = std::isnan(pa.hi) ? s.cfg.beta0 + 0.5 : pa.hi;
        if (!(hi > lo)) throw Error(ErrorKind::InvalidConfig, "--grid-hi must exceed --grid-lo");
        grid.clear();
        for (int j = 0; j < pa.points; ++j) grid.push_back(lo + (hi - lo) * j / (pa.points - 1));
    }

    RunManifest m = mc_manifest("power", s, a, c);
    ensure_kappa(s, a.jobs, m);
    const auto t1 = Clock::now();
    const auto results = run_experiment(s.cfg, specs, s.reps, grid, a.jobs);
    m.timings["replications"] = seconds_since(t1);

    fs::create_directories(c.out);
    const fs::path dir(c.out);
    for (const auto& r : results) {
        if (r.target != "beta1") continue;
        std::string name = "power_";
        for (char ch : r.estimator)
            if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-') name += ch;
            else if (ch == '/' || ch == '=') name += '_';
        name += ".csv";
        auto f = open_out(dir / name);
        write_power_csv(f, r);
        m.outputs[r.estimator] = (dir / name).string();
        std::printf("%s -> %s\n", r.estimator.c_str(), (dir / name).string().c_str());
    }
    m.timings["total"] = seconds_since(t0);
    write_manifest(dir, m);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trimmed mean group estimation for short-T heterogeneous panels"};
    app.require_subcommand(1);
    Common common;

    auto add_common = [&](CLI::App* sub, bool* alpha_set, bool* alpha_gp_set) {
        auto* oa = sub->add_option("--alpha", common.alpha, "trimming exponent for TMG-type estimators")
                       ->check(CLI::Range(0.0, 1.0));
        auto* og = sub->add_option("--alpha-gp", common.alpha_gp, "trimming exponent for GP-type estimators")
                       ->check(CLI::Range(0.0, 1.0));
        sub->add_option("--out", common.out, "output directory")->capture_default_str();
        if (alpha_set) {
            oa->each([alpha_set](const std::string&) { *alpha_set = true; });
            og->each([alpha_gp_set](const std::string&) { *alpha_gp_set = true; });
        }
    };

    EstimateArgs ea;
    auto* est = app.add_subcommand("estimate", "estimate average effects from a panel CSV");
    est->add_option("csv", ea.csv, "panel CSV (unit_id,time_id,y,x1,...)")->required();
    est->add_option("--method", ea.method, "estimator")
        ->check(CLI::IsMember({"fe", "mg", "tmg", "gp", "fete", "tmgte", "gpte"}))
        ->capture_default_str();
    est->add_flag("--te", ea.te, "include time effects");
    est->add_option("--per-unit", ea.per_unit, "write trimmed per-unit estimates to this CSV");
    add_common(est, nullptr, nullptr);

    TestArgs ta;
    auto* tst = app.add_subcommand("test", "Hausman test of correlated slope heterogeneity");
    tst->add_option("csv", ta.csv, "panel CSV")->required();
    tst->add_flag("--te", ta.te, "time-effects variant");
    add_common(tst, nullptr, nullptr);

    McArgs ma;
    auto add_mc = [&](CLI::App* sub) {
        sub->add_option("scenario", ma.scenario, "scenario JSON")->required();
        sub->add_option("--reps", ma.reps, "replications");
        sub->add_option("--seed", ma.seed, "override the scenario seed");
        sub->add_option("--jobs", ma.jobs, "worker threads")->capture_default_str();
        add_common(sub, &ma.alpha_set, &ma.alpha_gp_set);
    };
    auto* sim = app.add_subcommand("simulate", "run a Monte Carlo scenario");
    add_mc(sim);
    CalibrateArgs ca;
    auto* cal = app.add_subcommand("calibrate", "calibrate the error scale kappa^2 for a scenario");
    add_mc(cal);
    cal->add_option("--n", ca.n_cal, "cross-section size used for calibration");
    PowerArgs pa;
    auto* pow = app.add_subcommand("power", "power curve of the coefficient test over a grid of null values");
    add_mc(pow);
    pow->add_option("--method", pa.method, "estimator, e.g. tmg or tmg:0.5 (default: scenario estimators)");
    pow->add_option("--grid-lo", pa.lo, "lowest null value");
    pow->add_option("--grid-hi", pa.hi, "highest null value");
    pow->add_option("--grid-points", pa.points, "grid size")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*est) return run_estimate(ea, common);
        if (*tst) return run_test(ta, common);
        if (*sim) return run_simulate(ma, common);
        if (*cal) return run_calibrate(ma, ca, common);
        if (*pow) return run_power(ma, pa, common);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_input_error(e.kind()) ? kExitInput : kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return 0;
}
