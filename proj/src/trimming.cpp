#include "tmg/trimming.hpp"

#include <cmath>

#include "tmg/error.hpp"

namespace tmg {

void TrimConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorKind::InvalidConfig, "alpha must lie in (0,1), got " + std::to_string(alpha));
    if (scale == Scale::Explicit && !(c_n > 0.0))
        throw Error(ErrorKind::InvalidConfig, "explicit C_n must be positive");
}

VectorXd TrimState::normalized_weights() const {
    const double n = static_cast<double>(delta.size());
    return (1.0 + delta.array()) / (n * (1.0 + delta_bar));
}

double compute_threshold(const VectorXd& d, const TrimConfig& cfg) {
    cfg.validate();
    const double n = static_cast<double>(d.size());
    double c_n = cfg.c_n;
    if (cfg.scale == TrimConfig::Scale::MeanDeterminant) {
        c_n = d.sum() / n;
        if (!(c_n > 0.0)) throw Error(ErrorKind::AllSingular, "every unit has a zero determinant");
    }
    return c_n * std::pow(n, -cfg.alpha);
}

TrimState delta_weights(const VectorXd& d, double a_n) {
    const auto n = d.size();
    TrimState s;
    s.a_n = a_n;
    s.delta.setZero(n);
    s.trimmed.assign(static_cast<std::size_t>(n), 0);
    int count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (d(i) <= a_n) {
            s.delta(i) = (d(i) - a_n) / a_n;
            s.trimmed[static_cast<std::size_t>(i)] = 1;
            ++count;
        }
    }
    s.delta_bar = s.delta.mean();
    s.pi_n = static_cast<double>(count) / static_cast<double>(n);
    return s;
}

VectorXd determinants(const std::vector<UnitDesign>& designs) {
    VectorXd d(static_cast<Eigen::Index>(designs.size()));
    for (std::size_t i = 0; i < designs.size(); ++i) d(static_cast<Eigen::Index>(i)) = designs[i].d;
    return d;
}

TrimState trim(const std::vector<UnitDesign>& designs, const TrimConfig& cfg) {
    const VectorXd d = determinants(designs);
    return delta_weights(d, compute_threshold(d, cfg));
}

double trimmed_divisor(const UnitDesign& design, double a_n) {
    return design.d > a_n ? design.d : a_n;
}

VectorXd trimmed_unit_estimate(const UnitDesign& design, const VectorXd& y, double a_n) {
    if (design.d > a_n) return unit_ols(design, y);
    return design.adj * (design.W.transpose() * y) / a_n;
}

}  // namespace tmg
