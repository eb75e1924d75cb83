#include "tmg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "tmg/error.hpp"

namespace tmg {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& why) {
    throw Error(ErrorKind::InvalidConfig, "scenario field '" + field + "': " + why);
}

template <class T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        field_error(key, "wrong type");
    }
}

template <class E>
E parse_enum(const json& j, const std::string& key, std::initializer_list<E> values) {
    const auto s = get_as<std::string>(j, key);
    std::string allowed;
    for (E v : values) {
        if (to_string(v) == s) return v;
        allowed += (allowed.empty() ? "" : ", ") + to_string(v);
    }
    field_error(key, "unknown value '" + s + "' (expected one of: " + allowed + ")");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

constexpr const char* kResultsHeader =
    "estimator,target,truth,reps,failures,bias,rmse,size,pi_hat,mc_se_bias,mc_se_size";

double normal_two_sided_p(double t) { return std::erfc(std::abs(t) / std::sqrt(2.0)); }

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "not a number: '" + s + "'");
    }
    if (used != s.size()) throw Error(ErrorKind::ParseError, "not a number: '" + s + "'");
    return v;
}

json config_to_json(const DgpConfig& c) {
    json j;
    j["n"] = c.n;
    j["T"] = c.T;
    j["alpha0"] = c.alpha0;
    j["beta0"] = c.beta0;
    j["sigma2_alpha"] = c.sigma2_alpha;
    j["sigma2_beta"] = c.sigma2_beta;
    j["rho_alpha"] = c.rho_alpha;
    j["rho_beta"] = c.rho_beta;
    j["pr2"] = c.pr2;
    j["y_error_dist"] = to_string(c.y_error_dist);
    j["x_error_dist"] = to_string(c.x_error_dist);
    j["rho_ie_mode"] = to_string(c.rho_ie_mode);
    j["rho_ix_mode"] = to_string(c.rho_ix_mode);
    j["interactive_x"] = c.interactive_x;
    j["heterosked"] = to_string(c.heterosked);
    j["time_effects"] = c.time_effects;
    j["kappa2"] = c.kappa2 ? json(*c.kappa2) : json(nullptr);
    j["seed"] = c.seed;
    j["burn_in"] = c.burn_in;
    return j;
}

std::string config_hash(const DgpConfig& cfg) {
    const std::string text = config_to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "scenario must be a JSON object");
    static const std::set<std::string> known = {
        "n", "T", "alpha0", "beta0", "sigma2_alpha", "sigma2_beta", "rho_alpha", "rho_beta", "pr2",
        "y_error_dist", "x_error_dist", "rho_ie_mode", "rho_ix_mode", "interactive_x", "heterosked",
        "time_effects", "kappa2", "seed", "burn_in", "estimators", "reps", "calib_reps", "calib_n", "name"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) field_error(key, "unknown field");

    Scenario s;
    DgpConfig& c = s.cfg;
    if (j.contains("n")) c.n = get_as<int>(j, "n");
    if (j.contains("T")) c.T = get_as<int>(j, "T");
    if (j.contains("alpha0")) c.alpha0 = get_as<double>(j, "alpha0");
    if (j.contains("beta0")) c.beta0 = get_as<double>(j, "beta0");
    if (j.contains("sigma2_alpha")) c.sigma2_alpha = get_as<double>(j, "sigma2_alpha");
    if (j.contains("sigma2_beta")) c.sigma2_beta = get_as<double>(j, "sigma2_beta");
    if (j.contains("rho_alpha")) c.rho_alpha = get_as<double>(j, "rho_alpha");
    if (j.contains("rho_beta")) c.rho_beta = get_as<double>(j, "rho_beta");
    if (j.contains("pr2")) c.pr2 = get_as<double>(j, "pr2");
    using D = DgpConfig;
    if (j.contains("y_error_dist"))
        c.y_error_dist = parse_enum(j, "y_error_dist", {D::YError::Gaussian, D::YError::ChiSq2Centered});
    if (j.contains("x_error_dist"))
        c.x_error_dist = parse_enum(j, "x_error_dist", {D::XError::Gaussian, D::XError::UniformScaled});
    if (j.contains("rho_ie_mode"))
        c.rho_ie_mode = parse_enum(j, "rho_ie_mode", {D::ArMode::Zero, D::ArMode::UniformUpTo095});
    if (j.contains("rho_ix_mode"))
        c.rho_ix_mode = parse_enum(j, "rho_ix_mode", {D::ArMode::Zero, D::ArMode::UniformUpTo095});
    if (j.contains("interactive_x")) c.interactive_x = get_as<bool>(j, "interactive_x");
    if (j.contains("heterosked"))
        c.heterosked = parse_enum(j, "heterosked",
                                  {D::Heterosked::Random, D::Heterosked::CaseA_lambda2, D::Heterosked::CaseB_ex2});
    if (j.contains("time_effects")) c.time_effects = get_as<bool>(j, "time_effects");
    if (j.contains("kappa2") && !j.at("kappa2").is_null()) c.kappa2 = get_as<double>(j, "kappa2");
    if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
    if (j.contains("burn_in")) c.burn_in = get_as<int>(j, "burn_in");
    if (j.contains("reps")) s.reps = get_as<int>(j, "reps");
    if (j.contains("calib_reps")) s.calib_reps = get_as<int>(j, "calib_reps");
    if (j.contains("calib_n")) s.calib_n = get_as<int>(j, "calib_n");
    if (j.contains("estimators")) {
        const json& e = j.at("estimators");
        if (!e.is_array()) field_error("estimators", "must be an array of strings");
        for (const auto& item : e) {
            if (!item.is_string()) field_error("estimators", "must be an array of strings");
            try {
                s.estimators.push_back(EstimatorSpec::parse(item.get<std::string>()));
            } catch (const Error& err) {
                field_error("estimators", err.what());
            }
        }
    }
    if (s.estimators.empty()) s.estimators = {EstimatorSpec::parse("fe"), EstimatorSpec::parse("tmg"),
                                              EstimatorSpec::parse("gp")};
    if (s.reps < 1) field_error("reps", "must be at least 1");
    if (s.calib_reps < 1) field_error("calib_reps", "must be at least 1");
    if (s.calib_n < 2) field_error("calib_n", "must be at least 2");
    try {
        c.validate();
    } catch (const Error& err) {
        std::string msg = err.what();
        if (auto pos = msg.find(": "); pos != std::string::npos) msg = msg.substr(pos + 2);
        const auto pos = msg.find(": ");
        if (pos == std::string::npos) throw;
        field_error(msg.substr(0, pos), msg.substr(pos + 2));
    }
    return s;
}

json scenario_to_json(const Scenario& s) {
    json j = config_to_json(s.cfg);
    if (j["kappa2"].is_null()) j.erase("kappa2");
    j["reps"] = s.reps;
    j["calib_reps"] = s.calib_reps;
    j["calib_n"] = s.calib_n;
    json e = json::array();
    for (const auto& spec : s.estimators) e.push_back(spec.token());
    j["estimators"] = e;
    return j;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open scenario file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ParseError, "scenario '" + path + "': " + e.what());
    }
    return scenario_from_json(j);
}

void write_results_csv(std::ostream& out, const std::vector<McResult>& results) {
    out << kResultsHeader << '\n';
    for (const auto& r : results) {
        out << r.estimator << ',' << r.target << ',' << format_double(r.truth) << ',' << r.reps << ','
            << r.failures << ',' << format_double(r.bias) << ',' << format_double(r.rmse) << ','
            << format_double(r.size) << ',' << format_double(r.pi_hat) << ',' << format_double(r.mc_se_bias)
            << ',' << format_double(r.mc_se_size) << '\n';
    }
}

std::vector<McResult> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader)
        throw Error(ErrorKind::ParseError, "results CSV: unexpected header");
    std::vector<McResult> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 11) throw Error(ErrorKind::ParseError, "results CSV: expected 11 fields");
        McResult r;
        r.estimator = f[0];
        r.target = f[1];
        r.truth = parse_double(f[2]);
        r.reps = std::stoi(f[3]);
        r.failures = std::stoi(f[4]);
        r.bias = parse_double(f[5]);
        r.rmse = parse_double(f[6]);
        r.size = parse_double(f[7]);
        r.pi_hat = parse_double(f[8]);
        r.mc_se_bias = parse_double(f[9]);
        r.mc_se_size = parse_double(f[10]);
        out.push_back(std::move(r));
    }
    return out;
}

void write_power_csv(std::ostream& out, const McResult& result) {
    out << "b0,rejection_rate,mc_se\n";
    const double R = std::max(result.reps, 1);
    for (const auto& [b, rate] : result.power_curve)
        out << format_double(b) << ',' << format_double(rate) << ','
            << format_double(std::sqrt(rate * (1.0 - rate) / R)) << '\n';
}

std::vector<CoefRow> coefficient_table(const Estimate& est, const std::vector<std::string>& x_names,
                                       const TimeEffects* te) {
    std::vector<CoefRow> rows;
    const VectorXd se = est.se();
    int j = 0;
    auto push = [&](const std::string& term, double b, double s) {
        CoefRow r{term, b, s, 0.0, 1.0};
        r.t = s > 0.0 ? b / s : (b == 0.0 ? 0.0 : std::copysign(HUGE_VAL, b));
        r.p_value = normal_two_sided_p(r.t);
        rows.push_back(r);
    };
    if (est.has_intercept()) {
        push("intercept", est.coef(0), se(0));
        j = 1;
    }
    for (std::size_t s = 0; s < x_names.size(); ++s, ++j) push(x_names[s], est.coef(j), se(j));
    if (te) {
        for (Eigen::Index t = 0; t < te->phi.size(); ++t)
            push("phi" + std::to_string(t + 1), te->phi(t), std::sqrt(std::max(te->cov(t, t), 0.0)));
    }
    return rows;
}

void write_coefficient_csv(std::ostream& out, const std::vector<CoefRow>& rows, const Estimate& est) {
    out << "term,estimate,se,t,p_value,pi_n,n_used\n";
    for (const auto& r : rows)
        out << r.term << ',' << format_double(r.estimate) << ',' << format_double(r.se) << ','
            << format_double(r.t) << ',' << format_double(r.p_value) << ',' << format_double(est.pi_n) << ','
            << est.n_used << '\n';
}

void write_per_unit_csv(std::ostream& out, const Estimate& est, const std::vector<std::string>& unit_ids) {
    if (!est.per_unit) throw Error(ErrorKind::InvalidConfig, "per-unit estimates are not available for this method");
    const MatrixXd& th = *est.per_unit;
    out << "unit_id,intercept";
    for (Eigen::Index c = 1; c < th.cols(); ++c) out << ",x" << c;
    out << '\n';
    for (Eigen::Index i = 0; i < th.rows(); ++i) {
        out << (static_cast<std::size_t>(i) < unit_ids.size() ? unit_ids[i] : std::to_string(i));
        for (Eigen::Index c = 0; c < th.cols(); ++c) out << ',' << format_double(th(i, c));
        out << '\n';
    }
}

void write_hausman_csv(std::ostream& out, const HausmanResult& h) {
    out << "variant,statistic,df,p_value\n";
    out << to_string(h.variant) << ',' << format_double(h.statistic) << ',' << h.df << ','
        << format_double(h.p_value) << '\n';
}

json manifest_to_json(const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["reps"] = m.reps;
    j["jobs"] = m.jobs;
    j["alpha"] = m.alpha;
    j["alpha_gp"] = m.alpha_gp;
    j["version"] = version_string();
    j["timings"] = m.timings;
    j["outputs"] = m.outputs;
    j["extra"] = m.extra;
    return j;
}

RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    try {
        m.command = j.at("command").get<std::string>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.reps = j.at("reps").get<int>();
        m.jobs = j.at("jobs").get<int>();
        m.alpha = j.at("alpha").get<double>();
        m.alpha_gp = j.at("alpha_gp").get<double>();
        m.timings = j.at("timings").get<std::map<std::string, double>>();
        m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
        if (j.contains("extra")) m.extra = j.at("extra");
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("manifest: ") + e.what());
    }
    return m;
}

std::string version_string() {
    std::ostringstream os;
    os << "tmg " << TMG_VERSION << " (Eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
       << EIGEN_MINOR_VERSION << ", nlohmann_json " << NLOHMANN_JSON_VERSION_MAJOR << '.'
       << NLOHMANN_JSON_VERSION_MINOR << '.' << NLOHMANN_JSON_VERSION_PATCH << ")";
    return os.str();
}

}  // namespace tmg
