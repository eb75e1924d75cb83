#pragma once

#include <vector>

#include "tmg/design.hpp"

namespace tmg {

struct TrimConfig {
    enum class Scale { MeanDeterminant, Explicit };

    double alpha = 1.0 / 3.0;
    Scale scale = Scale::MeanDeterminant;
    double c_n = 0.0;  // used when scale == Explicit

    static TrimConfig with_alpha(double a) { return TrimConfig{a, Scale::MeanDeterminant, 0.0}; }
    static TrimConfig explicit_scale(double a, double c) { return TrimConfig{a, Scale::Explicit, c}; }
    void validate() const;
};

struct TrimState {
    double a_n = 0.0;
    VectorXd delta;  // (d_i - a_n)/a_n when d_i <= a_n, else 0
    double delta_bar = 0.0;
    double pi_n = 0.0;
    std::vector<char> trimmed;

    // (1 + delta_i) / (n (1 + delta_bar)); sums to one
    VectorXd normalized_weights() const;
};

// a_n = C_n n^{-alpha}
double compute_threshold(const VectorXd& d, const TrimConfig& cfg);
TrimState delta_weights(const VectorXd& d, double a_n);
TrimState trim(const std::vector<UnitDesign>& designs, const TrimConfig& cfg);

// Untrimmed units divide by d_i, trimmed ones by a_n: (1+delta_i)(W'W)^{-1} = adj / max(d_i, a_n).
double trimmed_divisor(const UnitDesign& design, double a_n);
VectorXd trimmed_unit_estimate(const UnitDesign& design, const VectorXd& y, double a_n);

VectorXd determinants(const std::vector<UnitDesign>& designs);

}  // namespace tmg
