#pragma once

#include <array>
#include <cmath>

namespace bosestats {

struct SymEig3 {
    std::array<double, 3> values;                 ///< ascending
    std::array<std::array<double, 3>, 3> vectors; ///< vectors[i] pairs with values[i]
};

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
inline SymEig3 sym_eig3(const std::array<std::array<double, 3>, 3>& m_in) {
    std::array<std::array<double, 3>, 3> a = m_in;
    std::array<std::array<double, 3>, 3> v = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::fabs(a[0][1]) + std::fabs(a[0][2]) + std::fabs(a[1][2]);
        double scale = std::fabs(a[0][0]) + std::fabs(a[1][1]) + std::fabs(a[2][2]);
        if (off <= 1e-15 * (scale > 0.0 ? scale : 1.0)) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v[k][p];
                    const double vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    SymEig3 out;
    std::array<int, 3> idx = {0, 1, 2};
    std::array<double, 3> diag = {a[0][0], a[1][1], a[2][2]};
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            if (diag[idx[j]] < diag[idx[i]]) std::swap(idx[i], idx[j]);
        }
    }
    for (int i = 0; i < 3; ++i) {
        out.values[i] = diag[idx[i]];
        for (int k = 0; k < 3; ++k) out.vectors[i][k] = v[k][idx[i]];
    }
    return out;
}

} // namespace bosestats
