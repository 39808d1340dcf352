#include <doctest.h>

#include <cmath>
#include <vector>

#include "bosestats/rng.hpp"
#include "bosestats/special.hpp"
#include "bosestats/stats.hpp"
#include "chi2_oracle.hpp"

using namespace bosestats;

namespace {

/// n values with exactly the requested mean and unbiased standard deviation
/// (pairs mean +- a with a chosen for the n-1 denominator).
Sample exact_moments_sample(double mean, double sigma, std::size_t n) {
    Sample s;
    const double a = sigma * std::sqrt((static_cast<double>(n) - 1.0) / static_cast<double>(n));
    for (std::size_t i = 0; i < n / 2; ++i) {
        s.values.push_back(mean - a);
        s.values.push_back(mean + a);
    }
    return s;
}

} // namespace

TEST_SUITE("stats") {

TEST_CASE("a large Poisson sample is Poissonian to one percent") {
    RngStream stream({11});
    Sample s;
    const int n = 100000;
    for (int i = 0; i < n; ++i) s.values.push_back(static_cast<double>(stream.poisson(100.0)));
    const FluctReport rep = fluct_report(s);
    CHECK(rep.normalized == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::fabs(rep.normalized - 1.0) < 3.0 / std::sqrt(2.0 * n));
}

TEST_CASE("a constant sample is reported as degenerate with zero spread") {
    Sample s;
    s.values.assign(100, 60.0);
    const FluctReport rep = fluct_report(s);
    CHECK(rep.degenerate);
    CHECK(rep.normalized == 0.0);
    CHECK(rep.ci68_normalized.width() == 0.0);
    CHECK(rep.ci99_relative.width() == 0.0);
}

TEST_CASE("the 7.9 percent operating sample normalizes to 0.612") {
    const Sample s = exact_moments_sample(60.0, 0.079 * 60.0, 100);
    const FluctReport rep = fluct_report(s);
    CHECK(rep.mean == doctest::Approx(60.0).epsilon(1e-12));
    CHECK(rep.relative == doctest::Approx(0.079).epsilon(1e-12));
    CHECK(rep.normalized == doctest::Approx(0.612).epsilon(1e-3));
    // well below the Poissonian reference at this mean
    CHECK(rep.ci99_relative.hi < rep.poisson_ref.value);
}

TEST_CASE("normalized equals relative times sqrt(mean) to machine precision") {
    RngStream stream({12});
    for (int rep_i = 0; rep_i < 20; ++rep_i) {
        Sample s;
        for (int i = 0; i < 50; ++i) s.values.push_back(50.0 + 10.0 * stream.normal());
        const FluctReport rep = fluct_report(s);
        CHECK(rep.normalized ==
              doctest::Approx(rep.relative * std::sqrt(rep.mean)).epsilon(1e-12));
    }
}

TEST_CASE("fluct_report requires two values") {
    Sample s;
    s.values = {60.0};
    CHECK_THROWS_AS(fluct_report(s), ValidationError);
}

TEST_CASE("sigma interval collapses to the point estimate as the level vanishes") {
    const Interval tiny = sigma_ci(0.079, 100, 1e-9);
    CHECK(tiny.width() < 1e-6 * 0.079);
    CHECK(tiny.lo == doctest::Approx(0.079).epsilon(0.005));
}

TEST_CASE("the 99 percent interval for the operating sample, against the oracle") {
    const double s = 0.079;
    const std::size_t n = 100;
    const Interval ci = sigma_ci(s, n, 0.99);

    const double hi_q = oracle::chi2_quantile(0.995, 99.0);
    const double lo_q = oracle::chi2_quantile(0.005, 99.0);
    CHECK(ci.lo == doctest::Approx(s * std::sqrt(99.0 / hi_q)).epsilon(1e-6));
    CHECK(ci.hi == doctest::Approx(s * std::sqrt(99.0 / lo_q)).epsilon(1e-6));

    // at n = 100 the 99% interval around a 7.9% estimate is wide: it spans
    // roughly [6.7%, 9.6%], well past a +-0.5%-ish band on either side
    CHECK(ci.lo < 0.074);
    CHECK(ci.hi > 0.085);
    CHECK(ci.lo == doctest::Approx(0.0667).epsilon(0.01));
    CHECK(ci.hi == doctest::Approx(0.0964).epsilon(0.01));
}

TEST_CASE("99 percent intervals cover the true sigma 99 percent of the time") {
    const int reps = 10000;
    const std::size_t n = 100;
    int covered = 0;
    for (int rep_i = 0; rep_i < reps; ++rep_i) {
        RngStream stream({13, static_cast<std::uint64_t>(rep_i)});
        Sample s;
        for (std::size_t i = 0; i < n; ++i) s.values.push_back(stream.normal());
        covered += sigma_ci(s.stddev(), n, 0.99).contains(1.0);
    }
    const double coverage = static_cast<double>(covered) / reps;
    CHECK(coverage > 0.98);
    CHECK(coverage <= 1.0);
}

TEST_CASE("interval width shrinks like the square root of the sample size") {
    const double s = 0.079;
    const double ratio = sigma_ci(s, 400, 0.99).width() / sigma_ci(s, 100, 0.99).width();
    CHECK(ratio > 0.45);
    CHECK(ratio < 0.55);
}

TEST_CASE("poisson reference values and band conventions") {
    const PoissonReference at60 = poisson_reference(60.0, 0.10);
    CHECK(at60.value == doctest::Approx(0.1291).epsilon(1e-3));
    CHECK(at60.band_linear == doctest::Approx(0.1291 * 0.10 / 2.0).epsilon(1e-3));
    CHECK(at60.exact_band.lo == doctest::Approx(1.0 / std::sqrt(66.0)).epsilon(1e-12));
    CHECK(at60.exact_band.hi == doctest::Approx(1.0 / std::sqrt(54.0)).epsilon(1e-12));
    // both conventions bracket the coarser half-percent quote
    CHECK(at60.band_linear > 0.005);
    CHECK(at60.exact_band.hi - at60.value > 0.005);

    CHECK(poisson_reference(100.0, 0.10).value == doctest::Approx(0.10).epsilon(1e-12));
}

TEST_CASE("moments fit equals the fluctuation report exactly") {
    RngStream stream({14});
    Sample s;
    for (int i = 0; i < 100; ++i) s.values.push_back(60.0 + 4.74 * stream.normal());
    const GaussianFit fit = gaussian_fit_moments(s);
    const FluctReport rep = fluct_report(s);
    CHECK(fit.mean == rep.mean);
    CHECK(fit.sigma == rep.sigma);
    CHECK(std::fabs(fit.sigma / fit.mean - 0.079) < 3.0 * 0.0056);
}

TEST_CASE("moments fit is location- and scale-equivariant") {
    RngStream stream({15});
    Sample s;
    for (int i = 0; i < 64; ++i) s.values.push_back(stream.normal());
    const GaussianFit base = gaussian_fit_moments(s);
    const double a = -2.5, b = 7.0;
    Sample mapped;
    for (double v : s.values) mapped.values.push_back(a * v + b);
    const GaussianFit fit = gaussian_fit_moments(mapped);
    CHECK(fit.mean == doctest::Approx(a * base.mean + b).epsilon(1e-12));
    CHECK(fit.sigma == doctest::Approx(std::fabs(a) * base.sigma).epsilon(1e-12));
}

TEST_CASE("binned fit recovers an analytic Gaussian histogram exactly") {
    HistogramResult h;
    h.bin_width = 1.0;
    const double mu = 60.3, sigma = 4.74, amp = 25.0;
    for (int k = 40; k <= 80; ++k) {
        h.centers.push_back(static_cast<double>(k));
        const double d = k - mu;
        h.counts.push_back(amp * std::exp(-d * d / (2.0 * sigma * sigma)));
    }
    const BinnedGaussianFit fit = gaussian_fit_binned(h);
    CHECK(fit.mean == doctest::Approx(mu).epsilon(1e-6));
    CHECK(fit.sigma == doctest::Approx(sigma).epsilon(1e-6));
    CHECK(fit.amplitude == doctest::Approx(amp).epsilon(1e-6));
}

TEST_CASE("binned fit rejects degenerate histograms") {
    HistogramResult h;
    h.bin_width = 1.0;
    h.centers = {59.0, 60.0, 61.0};
    h.counts = {0.0, 100.0, 0.0};
    CHECK_THROWS_AS(gaussian_fit_binned(h), FitFailureError);
}

TEST_CASE("a constant sample fills a single histogram bin") {
    Sample s;
    s.values.assign(100, 60.0);
    const HistogramResult h = histogram(s);
    REQUIRE(h.counts.size() == 1);
    CHECK(h.counts[0] == 100.0);
    CHECK(h.centers[0] == 60.0);
}

TEST_CASE("poisson overlay passes a goodness-of-fit test on Poisson data") {
    RngStream stream({16});
    Sample s;
    const int n = 10000;
    for (int i = 0; i < n; ++i) s.values.push_back(static_cast<double>(stream.poisson(60.0)));
    const HistogramResult h = histogram(s, 1);

    double chi2 = 0.0;
    int bins = 0;
    double obs = 0.0, expd = 0.0;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        obs += h.counts[b];
        expd += h.poisson_overlay[b];
        if (expd >= 5.0) {
            chi2 += (obs - expd) * (obs - expd) / expd;
            ++bins;
            obs = expd = 0.0;
        }
    }
    const double p_value = 1.0 - chi2_cdf(chi2, bins - 1);
    CHECK(p_value > 0.01);
}

TEST_CASE("a squeezed Gaussian sample is visibly narrower than its Poisson overlay") {
    RngStream stream({17});
    Sample s;
    for (int i = 0; i < 5000; ++i) s.values.push_back(60.0 + 4.74 * stream.normal());
    const double var = s.stddev() * s.stddev();
    const double ratio = var / s.mean();
    CHECK(ratio > 0.30);
    CHECK(ratio < 0.45); // 4.74^2 / 60 = 0.374
}

} // TEST_SUITE
