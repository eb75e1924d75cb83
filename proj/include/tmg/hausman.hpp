#pragma once

#include "tmg/time_effects.hpp"

namespace tmg {

enum class HausmanVariant { NoTE, TE_TeqK, TE_TgtK };

const char* to_string(HausmanVariant v);

struct HausmanResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    HausmanVariant variant = HausmanVariant::NoTE;
    VectorXd delta;    // FE-type minus TMG-type slopes
    MatrixXd v_delta;  // robust variance of sqrt(n) * delta
};

HausmanResult hausman_no_te(const BalancedPanel& panel, const TrimConfig& cfg = {});
HausmanResult hausman_no_te(const BalancedPanel& panel, const std::vector<UnitDesign>& designs,
                            const TrimConfig& cfg);

// Dispatches on T = k versus T > k.
HausmanResult hausman_te(const BalancedPanel& panel, const TrimConfig& cfg = {});
HausmanResult hausman_te(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, const TrimConfig& cfg);

// n delta' V^+ delta with a symmetric pseudo-inverse (relative eigenvalue cutoff 1e-12).
HausmanResult hausman_statistic(const VectorXd& delta, const MatrixXd& v_delta, int n, HausmanVariant variant,
                                double coef_scale);

}  // namespace tmg
