#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tmg/design.hpp"
#include "tmg/error.hpp"
#include "tmg/trimming.hpp"

namespace tmg {

enum class Method { FE, MG, TMG, GP, FE_TE, TMG_TE, GP_TE };

const char* to_string(Method m);

struct Estimate {
    Method method = Method::FE;
    VectorXd coef;  // (intercept, slopes) for mean-group types, slopes only for FE types
    MatrixXd cov;
    int n_used = 0;
    double pi_n = 0.0;
    std::optional<double> alpha_used;
    std::optional<MatrixXd> per_unit;  // n x k rows of trimmed unit estimates

    bool has_intercept() const;
    VectorXd se() const;
    VectorXd slopes() const;
    MatrixXd slope_cov() const;
};

struct EfficiencyDiagnostics {
    MatrixXd A_n;
    MatrixXd B_n;
};

// Hard-trimming rule used by the GP estimator.
struct GpTrim {
    double h_n = 0.0;
    double c_gp = 0.0;
    std::vector<char> trimmed;
    double pi_n = 0.0;
};

Estimate fe(const BalancedPanel& panel);
Estimate mg(const BalancedPanel& panel);
Estimate tmg(const BalancedPanel& panel, const TrimConfig& cfg = {});
Estimate gp(const BalancedPanel& panel, double alpha_gp = 1.0 / 3.0);

// Overloads reusing precomputed unit designs.
Estimate mg(const BalancedPanel& panel, const std::vector<UnitDesign>& designs);
Estimate tmg(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, const TrimConfig& cfg);
Estimate tmg(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, const TrimState& state,
             double alpha);
Estimate gp(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, double alpha_gp);
GpTrim gp_trim(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, double alpha_gp);

EfficiencyDiagnostics efficiency_diagnostics(const BalancedPanel& panel, const MatrixXd& omega_beta,
                                             const std::vector<MatrixXd>& H);

// Type-7 sample quantile (linear interpolation between order statistics).
double sample_quantile(std::vector<double> v, double p);

// Shared helpers.
MatrixXd solve_checked(const MatrixXd& a, const MatrixXd& b, ErrorKind kind, const char* what);
MatrixXd symmetrize(const MatrixXd& m);

}  // namespace tmg
