#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmg/dgp.hpp"
#include "tmg/experiment.hpp"
#include "tmg/hausman.hpp"
#include "tmg/time_effects.hpp"

namespace tmg {

// A Monte Carlo scenario: DGP plus the estimator menu and replication counts.
struct Scenario {
    DgpConfig cfg;
    std::vector<EstimatorSpec> estimators;
    int reps = 2000;
    int calib_reps = 1000;
    int calib_n = 5000;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);

nlohmann::json config_to_json(const DgpConfig& cfg);
// FNV-1a over the canonical (sorted-key) JSON dump, as 16 hex digits.
std::string config_hash(const DgpConfig& cfg);

std::string format_double(double v);  // 17 significant digits, "nan"/"inf" spelled out
double parse_double(const std::string& s);

void write_results_csv(std::ostream& out, const std::vector<McResult>& results);
std::vector<McResult> read_results_csv(std::istream& in);
void write_power_csv(std::ostream& out, const McResult& result);

struct CoefRow {
    std::string term;
    double estimate = 0.0;
    double se = 0.0;
    double t = 0.0;
    double p_value = 1.0;
};

std::vector<CoefRow> coefficient_table(const Estimate& est, const std::vector<std::string>& x_names,
                                       const TimeEffects* te = nullptr);
void write_coefficient_csv(std::ostream& out, const std::vector<CoefRow>& rows, const Estimate& est);
void write_per_unit_csv(std::ostream& out, const Estimate& est, const std::vector<std::string>& unit_ids);
void write_hausman_csv(std::ostream& out, const HausmanResult& h);

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    int reps = 0;
    int jobs = 1;
    double alpha = 1.0 / 3.0;
    double alpha_gp = 1.0 / 3.0;
    std::map<std::string, double> timings;   // seconds
    std::map<std::string, std::string> outputs;
    nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

std::string version_string();

}  // namespace tmg
