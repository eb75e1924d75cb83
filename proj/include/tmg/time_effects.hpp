#pragma once

#include <vector>

#include "tmg/estimators.hpp"

namespace tmg {

enum class PhiMethod { Chamberlain, SystemSolve, FETE };

const char* to_string(PhiMethod m);

// Common time effects, normalized so that they sum to zero.
struct TimeEffects {
    VectorXd phi;
    MatrixXd cov;
    PhiMethod method = PhiMethod::FETE;
};

struct FeTeFit {
    Estimate est;
    TimeEffects te;
    MatrixXd psi_bar;  // n^{-1} sum (X_i - Xbar)' M_T (X_i - Xbar)
    MatrixXd X_bar;
    VectorXd y_bar;
};

struct Chamberlain {
    TimeEffects te;
    std::vector<MatrixXd> M;  // per-unit projectors
    MatrixXd M_bar;
};

// Mean-group estimate with time effects, plus the pieces the TE Hausman test reuses.
struct MeanGroupTeFit {
    Estimate est;
    TimeEffects te;
    TrimState trim;
    std::vector<MatrixXd> Q;  // T x k per unit: (1+delta_i) W_i (W_i'W_i)^{-1}
    MatrixXd Q_bar;           // n^{-1} sum Q_i / (1+delta_bar)
    MatrixXd system;          // I_k - Q_bar' M_T Wbar (T = k)
    std::vector<MatrixXd> M;  // Chamberlain projectors (T > k)
    MatrixXd M_bar;
};

// I_T - M_T X (X' M_T X)^+ X' M_T; the pseudo-inverse leaves I_T when X has no within variation.
MatrixXd chamberlain_projector(const MatrixXd& X);

FeTeFit fete_fit(const BalancedPanel& panel);
Chamberlain chamberlain_fit(const BalancedPanel& panel);
MeanGroupTeFit tmg_te_fit(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, const TrimConfig& cfg);
MeanGroupTeFit gp_te_fit(const BalancedPanel& panel, const std::vector<UnitDesign>& designs, double alpha_gp);

std::pair<Estimate, TimeEffects> fete(const BalancedPanel& panel);
TimeEffects chamberlain_phi(const BalancedPanel& panel);
std::pair<Estimate, TimeEffects> tmg_te(const BalancedPanel& panel, const TrimConfig& cfg = {});
std::pair<Estimate, TimeEffects> gp_te(const BalancedPanel& panel, double alpha_gp = 1.0 / 3.0);

}  // namespace tmg
