#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "bosestats/errors.hpp"
#include "bosestats/special.hpp"

namespace bosestats {

/// A series of measured atom numbers.
struct Sample {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }

    double mean() const {
        return std::accumulate(values.begin(), values.end(), 0.0) /
               static_cast<double>(values.size());
    }

    /// Unbiased (n-1) sample standard deviation.
    double stddev() const {
        const double m = mean();
        double ss = 0.0;
        for (double v : values) ss += (v - m) * (v - m);
        return std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Chi-square confidence interval for a standard deviation estimated from n
/// Gaussian samples: [s sqrt((n-1)/chi2_{(1+L)/2}), s sqrt((n-1)/chi2_{(1-L)/2})].
inline Interval sigma_ci(double sample_sigma, std::size_t n, double level) {
    if (n < 2) throw ValidationError("sigma_ci: need n >= 2");
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("sigma_ci: level must be in (0,1)");
    if (!(sample_sigma >= 0.0)) throw ValidationError("sigma_ci: sigma must be >= 0");
    if (sample_sigma == 0.0) return {0.0, 0.0};
    const double dof = static_cast<double>(n - 1);
    const double hi_q = chi2_quantile(0.5 * (1.0 + level), dof);
    const double lo_q = chi2_quantile(0.5 * (1.0 - level), dof);
    return {sample_sigma * std::sqrt(dof / hi_q), sample_sigma * std::sqrt(dof / lo_q)};
}

/// The Poissonian reference 1/sqrt(N) with the band induced by the absolute
/// atom-number accuracy. Both conventions are reported: the linearized
/// symmetric half-band value * accuracy / 2, and the exact asymmetric
/// interval [1/sqrt(n(1+a)), 1/sqrt(n(1-a))].
struct PoissonReference {
    double value = 0.0;
    double band_linear = 0.0;
    Interval exact_band;
};

inline PoissonReference poisson_reference(double mean_n, double abs_accuracy_rel = 0.10) {
    if (!(mean_n > 0.0)) throw ValidationError("poisson_reference: mean must be > 0");
    if (!(abs_accuracy_rel >= 0.0 && abs_accuracy_rel < 1.0)) {
        throw ValidationError("poisson_reference: accuracy must be in [0,1)");
    }
    PoissonReference ref;
    ref.value = 1.0 / std::sqrt(mean_n);
    ref.band_linear = ref.value * abs_accuracy_rel / 2.0;
    ref.exact_band = {1.0 / std::sqrt(mean_n * (1.0 + abs_accuracy_rel)),
                      1.0 / std::sqrt(mean_n * (1.0 - abs_accuracy_rel))};
    return ref;
}

/// Sample statistics in the units the fluctuation analysis uses: the spread,
/// the spread relative to the mean, and the spread normalized to the
/// Poissonian sigma = sqrt(mean).
struct FluctReport {
    std::size_t n = 0;
    double mean = 0.0;
    double sigma = 0.0;      ///< unbiased sample standard deviation
    double relative = 0.0;   ///< sigma / mean
    double normalized = 0.0; ///< sigma / sqrt(mean)
    Interval ci68_normalized;
    Interval ci99_relative;
    PoissonReference poisson_ref;
    bool degenerate = false; ///< all values equal
};

inline FluctReport fluct_report(const Sample& sample, double abs_accuracy_rel = 0.10) {
    if (sample.size() < 2) throw ValidationError("fluct_report: need at least 2 values");
    FluctReport rep;
    rep.n = sample.size();
    rep.mean = sample.mean();
    rep.sigma = sample.stddev();
    if (!(rep.mean > 0.0)) throw ValidationError("fluct_report: sample mean must be > 0");
    rep.relative = rep.sigma / rep.mean;
    rep.normalized = rep.sigma / std::sqrt(rep.mean);
    rep.poisson_ref = poisson_reference(rep.mean, abs_accuracy_rel);
    if (rep.sigma == 0.0) {
        rep.degenerate = true;
        return rep;
    }
    const Interval ci68 = sigma_ci(rep.sigma, rep.n, 0.68);
    const Interval ci99 = sigma_ci(rep.sigma, rep.n, 0.99);
    rep.ci68_normalized = {ci68.lo / std::sqrt(rep.mean), ci68.hi / std::sqrt(rep.mean)};
    rep.ci99_relative = {ci99.lo / rep.mean, ci99.hi / rep.mean};
    return rep;
}

/// Moments-path Gaussian fit: the sample mean and the same unbiased standard
/// deviation fluct_report uses, so the two always agree exactly.
struct GaussianFit {
    double mean = 0.0;
    double sigma = 0.0;
};

inline GaussianFit gaussian_fit_moments(const Sample& sample) {
    if (sample.size() < 2) throw ValidationError("gaussian_fit: need at least 2 values");
    return {sample.mean(), sample.stddev()};
}

/// Histogram with integer-aligned bins (edges on half-integers) and a
/// Poisson overlay of the same mean scaled to the sample size.
struct HistogramResult {
    double bin_width = 1.0;   ///< integer number of atom levels per bin
    double first_edge = 0.0;  ///< left edge of bin 0
    std::vector<double> centers;
    std::vector<double> counts;
    std::vector<double> poisson_overlay; ///< expected counts for Poisson(mean)
    std::size_t total = 0;
    double sample_mean = 0.0;
};

/// bin_width 0 selects the Freedman-Diaconis rule rounded to an integer.
inline HistogramResult histogram(const Sample& sample, int bin_width = 0) {
    if (sample.size() < 1) throw ValidationError("histogram: empty sample");
    std::vector<double> sorted = sample.values;
    std::sort(sorted.begin(), sorted.end());

    double width = static_cast<double>(bin_width);
    if (bin_width <= 0) {
        const auto quartile = [&](double q) {
            const double pos = q * static_cast<double>(sorted.size() - 1);
            const std::size_t i = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(i);
            return i + 1 < sorted.size() ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
                                         : sorted[i];
        };
        const double iqr = quartile(0.75) - quartile(0.25);
        const double fd = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
        width = std::max(1.0, std::round(fd));
    }

    HistogramResult h;
    h.bin_width = width;
    h.total = sample.size();
    h.sample_mean = sample.mean();

    const double lo_level = std::floor(sorted.front() + 0.5);
    const double hi_level = std::floor(sorted.back() + 0.5);
    h.first_edge = lo_level - 0.5;
    const std::size_t bins =
        static_cast<std::size_t>(std::floor((hi_level - lo_level) / width)) + 1;

    h.centers.assign(bins, 0.0);
    h.counts.assign(bins, 0.0);
    h.poisson_overlay.assign(bins, 0.0);
    for (std::size_t b = 0; b < bins; ++b) {
        h.centers[b] = h.first_edge + width * (static_cast<double>(b) + 0.5);
    }
    for (double v : sample.values) {
        std::size_t b = static_cast<std::size_t>(std::floor((v - h.first_edge) / width));
        if (b >= bins) b = bins - 1;
        h.counts[b] += 1.0;
    }
    for (std::size_t b = 0; b < bins; ++b) {
        const double edge_lo = h.first_edge + width * static_cast<double>(b);
        const double edge_hi = edge_lo + width;
        double mass = 0.0;
        for (long k = std::max(0L, std::lround(std::ceil(edge_lo))); k < edge_hi; ++k) {
            mass += poisson_pmf(static_cast<std::uint64_t>(k), h.sample_mean);
        }
        h.poisson_overlay[b] = mass * static_cast<double>(h.total);
    }
    return h;
}

/// Least-squares Gaussian a exp(-(x-mu)^2 / 2 sigma^2) through binned
/// counts, Gauss-Newton with step halving, seeded from the histogram
/// moments.
struct BinnedGaussianFit {
    double amplitude = 0.0;
    double mean = 0.0;
    double sigma = 0.0;
    int iterations = 0;
};

inline BinnedGaussianFit gaussian_fit_binned(const HistogramResult& h) {
    std::size_t nonzero = 0;
    for (double c : h.counts) {
        if (c > 0.0) ++nonzero;
    }
    if (nonzero < 3) throw FitFailureError("gaussian_fit: need at least 3 nonzero bins");

    double wsum = 0.0, mean = 0.0;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        wsum += h.counts[b];
        mean += h.counts[b] * h.centers[b];
    }
    mean /= wsum;
    double var = 0.0;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        var += h.counts[b] * (h.centers[b] - mean) * (h.centers[b] - mean);
    }
    var /= wsum;
    double sigma = std::sqrt(std::max(var, 0.25 * h.bin_width * h.bin_width));
    double amp = *std::max_element(h.counts.begin(), h.counts.end());

    const auto residual_ss = [&](double a, double m, double s) {
        double ss = 0.0;
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            const double d = h.centers[b] - m;
            const double r = a * std::exp(-d * d / (2.0 * s * s)) - h.counts[b];
            ss += r * r;
        }
        return ss;
    };

    double ss = residual_ss(amp, mean, sigma);
    BinnedGaussianFit fit;
    for (int iter = 0; iter < 200; ++iter) {
        // Gauss-Newton normal equations in (a, mu, sigma)
        double jtj[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        double jtr[3] = {0, 0, 0};
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            const double d = h.centers[b] - mean;
            const double e = std::exp(-d * d / (2.0 * sigma * sigma));
            const double model = amp * e;
            const double r = model - h.counts[b];
            const double j[3] = {e, model * d / (sigma * sigma),
                                 model * d * d / (sigma * sigma * sigma)};
            for (int i = 0; i < 3; ++i) {
                jtr[i] += j[i] * r;
                for (int k = 0; k < 3; ++k) jtj[i][k] += j[i] * j[k];
            }
        }
        // solve 3x3 by Gaussian elimination with partial pivoting
        double m[3][4];
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 3; ++k) m[i][k] = jtj[i][k];
            m[i][3] = -jtr[i];
        }
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int row = col + 1; row < 3; ++row) {
                if (std::fabs(m[row][col]) > std::fabs(m[piv][col])) piv = row;
            }
            if (std::fabs(m[piv][col]) < 1e-300) {
                throw FitFailureError("gaussian_fit: singular normal equations");
            }
            std::swap(m[piv], m[col]);
            for (int row = 0; row < 3; ++row) {
                if (row == col) continue;
                const double factor = m[row][col] / m[col][col];
                for (int k = col; k < 4; ++k) m[row][k] -= factor * m[col][k];
            }
        }
        const double da = m[0][3] / m[0][0];
        const double dm = m[1][3] / m[1][1];
        const double dsg = m[2][3] / m[2][2];

        double step = 1.0;
        bool improved = false;
        for (int half = 0; half < 30; ++half) {
            const double a2 = amp + step * da;
            const double m2 = mean + step * dm;
            const double s2 = sigma + step * dsg;
            if (a2 > 0.0 && s2 > 0.0) {
                const double ss2 = residual_ss(a2, m2, s2);
                if (ss2 < ss) {
                    amp = a2;
                    mean = m2;
                    sigma = s2;
                    ss = ss2;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        fit.iterations = iter + 1;
        const double move = std::fabs(dm) + std::fabs(dsg);
        if (!improved || move < 1e-10 * sigma) break;
    }

    fit.amplitude = amp;
    fit.mean = mean;
    fit.sigma = sigma;
    return fit;
}

} // namespace bosestats
