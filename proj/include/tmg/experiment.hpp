#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tmg/dgp.hpp"
#include "tmg/estimators.hpp"

namespace tmg {

enum class McEstimator { FE, MG, TMG, GP, FE_TE, TMG_TE, GP_TE, Hausman, HausmanTE };

struct EstimatorSpec {
    McEstimator kind = McEstimator::TMG;
    double alpha = 1.0 / 3.0;     // TMG family
    double alpha_gp = 1.0 / 3.0;  // GP family

    std::string label() const;
    std::string token() const;  // inverse of parse
    static EstimatorSpec parse(const std::string& text);  // e.g. "tmg", "tmg:0.5", "gp:0.25", "hausman"
};

struct McResult {
    std::string estimator;
    std::string target;  // "beta1", "phi1".., or "H" for tests
    double truth = 0.0;
    int reps = 0;
    int failures = 0;
    double bias = 0.0;
    double rmse = 0.0;
    double size = 0.0;  // rejection rate at the nominal 5% level
    double pi_hat = 0.0;
    double mc_se_bias = 0.0;
    double mc_se_size = 0.0;
    std::vector<std::pair<double, double>> power_curve;  // (b, rejection rate of H0: beta = b)
};

struct CalibrationResult {
    double kappa2 = 0.0;
    double var_beta_x = 0.0;
    int reps = 0;
    int n = 0;
};

// Stochastic calibration of kappa^2 from simulated (beta_i, x_it) only.
CalibrationResult calibrate_kappa(const DgpConfig& cfg, int reps = 1000, int n_cal = 5000, int jobs = 1);

std::vector<double> default_power_grid(double beta0, int points = 21, double half_width = 0.5);

// jobs == 1 runs the serial reference loop; larger values use OpenMP over replications.
std::vector<McResult> run_experiment(const DgpConfig& cfg, const std::vector<EstimatorSpec>& specs, int reps,
                                     const std::vector<double>& beta0_grid = {}, int jobs = 1);

constexpr double kNormalCritical = 1.959964;

}  // namespace tmg
