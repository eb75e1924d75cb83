#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tmg/exec.hpp"
#include "tmg/panel.hpp"

namespace tmg {

// Per-unit regression design W_i = (tau_T, X_i) and its exact Gram algebra.
struct UnitDesign {
    MatrixXd W;      // T x k
    MatrixXd gram;   // W'W
    double d = 0.0;  // det(W'W), zeroed below the singularity floor
    double d_raw = 0.0;
    MatrixXd adj;    // adjugate: gram * adj = d_raw * I
    MatrixXd psi_x;  // X'M_T X

    int k() const { return static_cast<int>(gram.rows()); }
    int k_prime() const { return k() - 1; }
    bool singular() const { return d <= 0.0; }
};

// Cofactor expansion for k <= 4, pivoted LU above.
double determinant(const MatrixXd& a);
MatrixXd adjugate(const MatrixXd& a);

// d below 1e-12 * (trace/k)^k is treated as zero
double singularity_floor(const MatrixXd& gram);

UnitDesign build_unit_design(const BalancedPanel& panel, int i);
std::vector<UnitDesign> build_designs(const BalancedPanel& panel, Exec exec = Exec::Serial);

// theta_i = adj W'y / d; throws SingularDesign when d is zero
VectorXd unit_ols(const UnitDesign& design, const VectorXd& y);

// M_T v: subtract the column mean
VectorXd within(const VectorXd& v);
MatrixXd within(const MatrixXd& m);

}  // namespace tmg
