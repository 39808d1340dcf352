#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "bosestats/vec3.hpp"

namespace bosestats {

struct NelderMeadResult {
    Vec3 point;
    double value = 0.0;
    int iterations = 0;
    bool escaped = false; ///< best vertex left the caller's bounds
};

/// Derivative-free simplex minimization in 3-D. `inside` flags the feasible
/// region; the search is declared escaped as soon as the best vertex leaves
/// it. Converges when the simplex diameter drops below `size_tol`.
template <class F, class InsideFn>
NelderMeadResult nelder_mead(F&& f, const InsideFn& inside, Vec3 start, double initial_step,
                             double size_tol, int max_iter = 2000) {
    constexpr int kDim = 3;
    constexpr int kVerts = kDim + 1;

    std::array<Vec3, kVerts> pts;
    std::array<double, kVerts> vals;
    pts[0] = start;
    for (int i = 0; i < kDim; ++i) {
        pts[i + 1] = start;
        pts[i + 1][i] += initial_step;
    }
    for (int i = 0; i < kVerts; ++i) vals[i] = f(pts[i]);

    NelderMeadResult out;
    auto order = [&] {
        for (int i = 1; i < kVerts; ++i) {
            Vec3 p = pts[i];
            double v = vals[i];
            int j = i - 1;
            while (j >= 0 && vals[j] > v) {
                pts[j + 1] = pts[j];
                vals[j + 1] = vals[j];
                --j;
            }
            pts[j + 1] = p;
            vals[j + 1] = v;
        }
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        order();
        out.iterations = iter;
        if (!inside(pts[0])) {
            out.point = pts[0];
            out.value = vals[0];
            out.escaped = true;
            return out;
        }
        double diameter = 0.0;
        for (int i = 1; i < kVerts; ++i) diameter = std::max(diameter, (pts[i] - pts[0]).norm());
        if (diameter < size_tol) break;

        Vec3 centroid;
        for (int i = 0; i < kDim; ++i) centroid = centroid + pts[i];
        centroid = centroid * (1.0 / kDim);

        const Vec3 reflected = centroid + (centroid - pts[kDim]);
        const double fr = f(reflected);
        if (fr < vals[0]) {
            const Vec3 expanded = centroid + (centroid - pts[kDim]) * 2.0;
            const double fe = f(expanded);
            if (fe < fr) {
                pts[kDim] = expanded;
                vals[kDim] = fe;
            } else {
                pts[kDim] = reflected;
                vals[kDim] = fr;
            }
        } else if (fr < vals[kDim - 1]) {
            pts[kDim] = reflected;
            vals[kDim] = fr;
        } else {
            const Vec3 contracted = centroid + (pts[kDim] - centroid) * 0.5;
            const double fc = f(contracted);
            if (fc < vals[kDim]) {
                pts[kDim] = contracted;
                vals[kDim] = fc;
            } else {
                for (int i = 1; i < kVerts; ++i) {
                    pts[i] = pts[0] + (pts[i] - pts[0]) * 0.5;
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    order();
    out.point = pts[0];
    out.value = vals[0];
    out.escaped = !inside(pts[0]);
    return out;
}

} // namespace bosestats
