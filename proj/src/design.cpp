#include "tmg/design.hpp"

#include <cmath>

#include "tmg/error.hpp"

namespace tmg {

namespace {

// Laplace expansion along the first row; m <= 4 keeps everything on the stack.
double laplace(const double* a, int m) {
    if (m == 1) return a[0];
    if (m == 2) return a[0] * a[3] - a[1] * a[2];
    if (m == 3)
        return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
               a[2] * (a[3] * a[7] - a[4] * a[6]);
    double minor[9];
    double det = 0.0;
    for (int c = 0; c < m; ++c) {
        int p = 0;
        for (int r = 1; r < m; ++r)
            for (int cc = 0; cc < m; ++cc)
                if (cc != c) minor[p++] = a[r * m + cc];
        const double term = a[c] * laplace(minor, m - 1);
        det += (c % 2 == 0) ? term : -term;
    }
    return det;
}

double minor_det(const MatrixXd& a, int skip_r, int skip_c) {
    const int m = static_cast<int>(a.rows());
    if (m - 1 <= 4) {
        double buf[16];
        int p = 0;
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c)
                if (r != skip_r && c != skip_c) buf[p++] = a(r, c);
        return laplace(buf, m - 1);
    }
    MatrixXd sub(m - 1, m - 1);
    for (int r = 0, rr = 0; r < m; ++r) {
        if (r == skip_r) continue;
        for (int c = 0, cc = 0; c < m; ++c) {
            if (c == skip_c) continue;
            sub(rr, cc++) = a(r, c);
        }
        ++rr;
    }
    return sub.partialPivLu().determinant();
}

}  // namespace

double determinant(const MatrixXd& a) {
    const int m = static_cast<int>(a.rows());
    if (m == 0) return 1.0;
    if (m <= 4) {
        double buf[16];
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) buf[r * m + c] = a(r, c);
        return laplace(buf, m);
    }
    return a.fullPivLu().determinant();
}

MatrixXd adjugate(const MatrixXd& a) {
    const int m = static_cast<int>(a.rows());
    MatrixXd adj(m, m);
    if (m == 1) {
        adj(0, 0) = 1.0;
        return adj;
    }
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
            const double cof = minor_det(a, r, c);
            adj(c, r) = ((r + c) % 2 == 0) ? cof : -cof;
        }
    return adj;
}

double singularity_floor(const MatrixXd& gram) {
    const double k = static_cast<double>(gram.rows());
    return 1e-12 * std::pow(gram.trace() / k, k);
}

UnitDesign build_unit_design(const BalancedPanel& panel, int i) {
    const int T = panel.T();
    const int k = panel.k();
    UnitDesign u;
    u.W.resize(T, k);
    u.W.col(0).setOnes();
    u.W.rightCols(k - 1) = panel.X(i);
    u.gram = u.W.transpose() * u.W;
    u.d_raw = determinant(u.gram);
    u.d = (u.d_raw < singularity_floor(u.gram)) ? 0.0 : u.d_raw;
    u.adj = adjugate(u.gram);
    const MatrixXd xw = within(MatrixXd(panel.X(i)));
    u.psi_x = xw.transpose() * xw;
    return u;
}

std::vector<UnitDesign> build_designs(const BalancedPanel& panel, Exec exec) {
    const int n = panel.n();
    std::vector<UnitDesign> out(n);
    if (exec == Exec::Serial) {
        for (int i = 0; i < n; ++i) out[i] = build_unit_design(panel, i);
    } else {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) out[i] = build_unit_design(panel, i);
    }
    return out;
}

VectorXd unit_ols(const UnitDesign& design, const VectorXd& y) {
    if (design.singular()) throw Error(ErrorKind::SingularDesign, "determinant below singularity floor");
    return design.adj * (design.W.transpose() * y) / design.d;
}

VectorXd within(const VectorXd& v) {
    return v.array() - v.mean();
}

MatrixXd within(const MatrixXd& m) {
    return m.rowwise() - m.colwise().mean();
}

}  // namespace tmg
