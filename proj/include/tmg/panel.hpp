#pragma once

#include <Eigen/Dense>
#include <istream>
#include <string>
#include <vector>

namespace tmg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Balanced panel stored unit-major: row i*T + t holds (y_it, x_it').
class BalancedPanel {
public:
    BalancedPanel() = default;
    BalancedPanel(int n, int T, VectorXd y, MatrixXd x,
                  std::vector<std::string> unit_ids = {}, std::vector<std::string> time_ids = {});

    int n() const { return n_; }
    int T() const { return T_; }
    int k_prime() const { return static_cast<int>(x_.cols()); }
    int k() const { return k_prime() + 1; }

    auto y(int i) const { return y_.segment(static_cast<Eigen::Index>(i) * T_, T_); }
    auto X(int i) const { return x_.middleRows(static_cast<Eigen::Index>(i) * T_, T_); }

    const VectorXd& y_all() const { return y_; }
    const MatrixXd& x_all() const { return x_; }
    const std::vector<std::string>& unit_ids() const { return unit_ids_; }
    const std::vector<std::string>& time_ids() const { return time_ids_; }

    // T x n matrix whose column i is y_i
    MatrixXd y_matrix() const;
    // cross-section means ybar (T) and Xbar (T x k')
    VectorXd y_bar() const;
    MatrixXd X_bar() const;

private:
    int n_ = 0;
    int T_ = 0;
    VectorXd y_;
    MatrixXd x_;
    std::vector<std::string> unit_ids_;
    std::vector<std::string> time_ids_;
};

struct PanelRecord {
    std::string unit_id;
    std::string time_id;
    double y = 0.0;
    std::vector<double> x;
};

// Validates and assembles records given in any order.
BalancedPanel load_panel(const std::vector<PanelRecord>& rows);

// CSV with header unit_id,time_id,y,x1[,x2,...]
std::vector<PanelRecord> read_panel_csv(std::istream& in);
BalancedPanel load_panel_csv(const std::string& path);

void write_panel_csv(std::ostream& out, const BalancedPanel& panel);

}  // namespace tmg
