#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "bosestats/errors.hpp"
#include "bosestats/vec3.hpp"

namespace bosestats {

struct Box3 {
    Vec3 lo;
    Vec3 hi;
};

struct GaussLegendre {
    std::vector<double> nodes;   ///< on (-1, 1)
    std::vector<double> weights; ///< sum to 2
};

/// Gauss-Legendre nodes and weights by Newton iteration on the Legendre
/// recurrence.
inline GaussLegendre gauss_legendre(int n) {
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        gl.nodes[i] = -x;
        gl.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.weights[i] = w;
        gl.weights[n - 1 - i] = w;
    }
    return gl;
}

struct CubatureResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    std::size_t boxes = 0;
};

namespace cubature_detail {

// Genz-Malik degree-7 rule with embedded degree-5 error estimate, 3-D
// specialization (33 points per box).
inline constexpr double kLambda2 = 0.358568582800318073; // sqrt(9/70)
inline constexpr double kLambda4 = 0.948683298050513800; // sqrt(9/10)
inline constexpr double kLambda5 = 0.688247201611685297; // sqrt(9/19)
inline constexpr double kRatio = 1.0 / 7.0;              // lambda2^2 / lambda4^2

inline constexpr double kW1 = -10936.0 / 19683.0;
inline constexpr double kW2 = 980.0 / 6561.0;
inline constexpr double kW3 = 620.0 / 19683.0;
inline constexpr double kW4 = 200.0 / 19683.0;
inline constexpr double kW5 = 6859.0 / 19683.0 / 8.0;

inline constexpr double kE1 = -1671.0 / 729.0;
inline constexpr double kE2 = 245.0 / 486.0;
inline constexpr double kE3 = -35.0 / 1458.0;
inline constexpr double kE4 = 25.0 / 729.0;

struct RuleEval {
    double integral = 0.0;
    double error = 0.0;
    int split_dim = 0;
};

template <class F>
RuleEval apply_rule(F&& f, const Vec3& center, const Vec3& half) {
    const double vol = 8.0 * half[0] * half[1] * half[2];
    const double f0 = f(center);

    double sum2 = 0.0, sum3 = 0.0;
    double diff[3];
    for (int d = 0; d < 3; ++d) {
        Vec3 p = center;
        p[d] = center[d] - kLambda2 * half[d];
        const double fa = f(p);
        p[d] = center[d] + kLambda2 * half[d];
        const double fb = f(p);
        p[d] = center[d] - kLambda4 * half[d];
        const double fc = f(p);
        p[d] = center[d] + kLambda4 * half[d];
        const double fd = f(p);
        sum2 += fa + fb;
        sum3 += fc + fd;
        diff[d] = std::fabs(fa + fb - 2.0 * f0 - kRatio * (fc + fd - 2.0 * f0));
    }

    double sum4 = 0.0;
    for (int d1 = 0; d1 < 2; ++d1) {
        for (int d2 = d1 + 1; d2 < 3; ++d2) {
            for (int s1 = -1; s1 <= 1; s1 += 2) {
                for (int s2 = -1; s2 <= 1; s2 += 2) {
                    Vec3 p = center;
                    p[d1] = center[d1] + s1 * kLambda4 * half[d1];
                    p[d2] = center[d2] + s2 * kLambda4 * half[d2];
                    sum4 += f(p);
                }
            }
        }
    }

    double sum5 = 0.0;
    for (int s = 0; s < 8; ++s) {
        Vec3 p;
        for (int d = 0; d < 3; ++d) {
            p[d] = center[d] + ((s >> d) & 1 ? kLambda5 : -kLambda5) * half[d];
        }
        sum5 += f(p);
    }

    const double res7 = vol * (kW1 * f0 + kW2 * sum2 + kW3 * sum3 + kW4 * sum4 + kW5 * sum5);
    const double res5 = vol * (kE1 * f0 + kE2 * sum2 + kE3 * sum3 + kE4 * sum4);

    RuleEval out;
    out.integral = res7;
    out.error = std::fabs(res7 - res5);
    out.split_dim = 0;
    double best = diff[0];
    for (int d = 1; d < 3; ++d) {
        if (diff[d] > best) {
            best = diff[d];
            out.split_dim = d;
        }
    }
    if (best == 0.0) {
        // featureless box: split the widest side
        out.split_dim = 0;
        for (int d = 1; d < 3; ++d) {
            if (half[d] > half[out.split_dim]) out.split_dim = d;
        }
    }
    return out;
}

struct Region {
    Vec3 center;
    Vec3 half;
    double integral;
    double error;
    int split_dim;
};

struct RegionWorse {
    bool operator()(const Region& a, const Region& b) const { return a.error < b.error; }
};

} // namespace cubature_detail

/// Adaptive cubature of f over an axis-aligned box: Genz-Malik rule per
/// region, always subdividing the region with the largest error estimate
/// along its suggested dimension. Stops when the summed error drops below
/// max(rel_tol * |integral|, abs_tol); throws QuadratureFailureError if the
/// evaluation budget runs out first.
template <class F>
CubatureResult integrate_box(F&& f, const Box3& box, double rel_tol, double abs_tol = 0.0,
                             std::size_t max_evals = 20'000'000) {
    using namespace cubature_detail;
    constexpr std::size_t kEvalsPerBox = 33;

    Region first;
    first.center = (box.lo + box.hi) * 0.5;
    first.half = (box.hi - box.lo) * 0.5;
    {
        const RuleEval r = apply_rule(f, first.center, first.half);
        first.integral = r.integral;
        first.error = r.error;
        first.split_dim = r.split_dim;
    }

    std::priority_queue<Region, std::vector<Region>, RegionWorse> heap;
    heap.push(first);
    double total_int = first.integral;
    double total_err = first.error;
    std::size_t evals = kEvalsPerBox;

    CubatureResult out;
    while (total_err > abs_tol && total_err > rel_tol * std::fabs(total_int)) {
        if (evals + 2 * kEvalsPerBox > max_evals) {
            throw QuadratureFailureError("integrate_box: evaluation budget exhausted before tolerance");
        }
        Region worst = heap.top();
        heap.pop();
        total_int -= worst.integral;
        total_err -= worst.error;

        const int d = worst.split_dim;
        Region child = worst;
        child.half[d] *= 0.5;
        for (int side = -1; side <= 1; side += 2) {
            child.center[d] = worst.center[d] + side * child.half[d];
            const RuleEval r = apply_rule(f, child.center, child.half);
            child.integral = r.integral;
            child.error = r.error;
            child.split_dim = r.split_dim;
            total_int += r.integral;
            total_err += r.error;
            heap.push(child);
        }
        evals += 2 * kEvalsPerBox;
    }

    out.value = total_int;
    out.error = total_err;
    out.evaluations = evals;
    out.boxes = heap.size();
    return out;
}

} // namespace bosestats
