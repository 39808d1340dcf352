#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "bosestats/errors.hpp"
#include "bosestats/rng.hpp"

namespace bosestats {

/// Fluorescence detection chain: per-atom count rate over a background,
/// binned photon counting, Poissonian background capture during the
/// exposure, and the absolute calibration uncertainty of the atom-number
/// scale. The window/threshold pair parameterizes step detection.
struct DetectorSpec {
    double rate_per_atom = 1e4;          ///< counts/s
    double background_rate = 2e4;        ///< counts/s
    double bin_duration = 0.1;           ///< s
    double capture_mean = 5.0;           ///< atoms per exposure
    double calibration_error_rel = 0.10; ///< absolute-scale accuracy
    int window_bins = 5;                 ///< two-sample test window
    double threshold_sigma = 4.0;        ///< change-point threshold
    double ambiguity_atoms = 0.4;        ///< max distance from an integer level

    void validate() const {
        if (!(rate_per_atom >= 0.0) || !(background_rate >= 0.0)) {
            throw ValidationError("detector: rates must be >= 0");
        }
        if (!(bin_duration > 0.0)) throw ValidationError("detector: bin duration must be > 0");
        if (!(capture_mean >= 0.0)) throw ValidationError("detector: capture mean must be >= 0");
        if (!(calibration_error_rel >= 0.0)) {
            throw ValidationError("detector: calibration error must be >= 0");
        }
        if (window_bins < 2) throw ValidationError("detector: window must be >= 2 bins");
        if (!(threshold_sigma > 0.0)) throw ValidationError("detector: threshold must be > 0");
    }
};

/// Binned photon-count time series.
struct CountTrace {
    std::vector<std::uint64_t> counts;
    double bin_duration = 0.1; ///< s
};

/// Piecewise-constant atom count over time: each step holds from its start
/// time until the next step.
struct AtomSchedule {
    struct Step {
        double time = 0.0; ///< s
        int atoms = 0;
    };
    std::vector<Step> steps;

    static AtomSchedule constant(int atoms) { return {{{0.0, atoms}}}; }

    int at(double t) const {
        int n = 0;
        for (const Step& s : steps) {
            if (s.time <= t) {
                n = s.atoms;
            } else {
                break;
            }
        }
        return n;
    }

    void validate() const {
        double prev = -1.0;
        for (const Step& s : steps) {
            if (s.atoms < 0) throw ValidationError("schedule: atom counts must be >= 0");
            if (s.time < prev) throw ValidationError("schedule: steps must be time-ordered");
            prev = s.time;
        }
    }
};

/// Simulate the binned photon counter: bin i is Poisson with mean
/// (background + n_atoms * rate_per_atom) * bin_duration, where n_atoms is
/// the schedule value at the bin midpoint. Bin i draws from the stream
/// (seed, i).
inline CountTrace simulate_trace(const AtomSchedule& schedule, const DetectorSpec& spec,
                                 double duration, std::uint64_t seed) {
    spec.validate();
    schedule.validate();
    if (!(duration >= 0.0)) throw ValidationError("simulate_trace: duration must be >= 0");

    CountTrace trace;
    trace.bin_duration = spec.bin_duration;
    const std::size_t bins = static_cast<std::size_t>(std::floor(duration / spec.bin_duration + 1e-9));
    trace.counts.reserve(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        const double mid = (static_cast<double>(i) + 0.5) * spec.bin_duration;
        const int atoms = schedule.at(mid);
        const double mean = (spec.background_rate + atoms * spec.rate_per_atom) * spec.bin_duration;
        RngStream stream({seed, static_cast<std::uint64_t>(i)});
        trace.counts.push_back(stream.poisson(mean));
    }
    return trace;
}

/// A run of bins sharing one fluorescence level.
struct Segment {
    std::size_t first_bin = 0;
    std::size_t last_bin = 0; ///< inclusive
    int atoms = 0;
    double mean_counts = 0.0; ///< counts per bin

    std::size_t length() const { return last_bin - first_bin + 1; }
};

namespace detector_detail {

inline double segment_mean(const std::vector<std::uint64_t>& c, std::size_t first, std::size_t last) {
    double sum = 0.0;
    for (std::size_t i = first; i <= last; ++i) sum += static_cast<double>(c[i]);
    return sum / static_cast<double>(last - first + 1);
}

/// Nearest atom level for a segment mean; throws if the mean sits too far
/// from every integer.
inline int level_of(double mean_counts, const DetectorSpec& spec) {
    const double raw =
        (mean_counts / spec.bin_duration - spec.background_rate) / spec.rate_per_atom;
    const long nearest = std::lround(raw);
    const long level = nearest < 0 ? 0 : nearest;
    if (std::fabs(raw - static_cast<double>(level)) > spec.ambiguity_atoms) {
        throw AmbiguousLevelError("detect_steps: segment mean is " + std::to_string(raw) +
                                  " atom-equivalents, not near any integer level");
    }
    return static_cast<int>(level);
}

} // namespace detector_detail

/// Decode discrete atom-number levels from a counting trace. A two-sample
/// mean test on W-bin sliding windows marks change points (local maxima of
/// the test statistic above threshold_sigma standard errors); segments
/// shorter than W are merged into the neighbour with the closer mean, and
/// adjacent segments that decode to the same level are coalesced.
inline std::vector<Segment> detect_steps(const CountTrace& trace, const DetectorSpec& spec) {
    spec.validate();
    if (!(spec.rate_per_atom > 0.0)) {
        throw ValidationError("detect_steps: per-atom rate must be > 0 to decode levels");
    }
    std::vector<Segment> segments;
    const std::size_t n = trace.counts.size();
    if (n == 0) return segments;

    const std::size_t w = static_cast<std::size_t>(spec.window_bins);
    std::vector<std::size_t> boundaries; // segment starts (bin index of first bin after a step)
    if (n >= 2 * w) {
        std::vector<double> stat(n + 1, 0.0);
        for (std::size_t i = w; i + w <= n; ++i) {
            const double ml = detector_detail::segment_mean(trace.counts, i - w, i - 1);
            const double mr = detector_detail::segment_mean(trace.counts, i, i + w - 1);
            const double var = std::max(ml + mr, 1e-9); // Poisson: variance ~ mean
            stat[i] = std::fabs(mr - ml) / std::sqrt(var / static_cast<double>(w));
        }
        std::size_t i = w;
        while (i + w <= n) {
            if (stat[i] >= spec.threshold_sigma) {
                std::size_t best = i;
                std::size_t j = i;
                while (j + w <= n && stat[j] >= spec.threshold_sigma) {
                    if (stat[j] > stat[best]) best = j;
                    ++j;
                }
                boundaries.push_back(best);
                i = j;
            } else {
                ++i;
            }
        }
    }

    std::size_t start = 0;
    for (std::size_t b : boundaries) {
        segments.push_back({start, b - 1, 0, 0.0});
        start = b;
    }
    segments.push_back({start, n - 1, 0, 0.0});
    for (auto& s : segments) {
        s.mean_counts = detector_detail::segment_mean(trace.counts, s.first_bin, s.last_bin);
    }

    // absorb fragments shorter than the test window
    while (segments.size() > 1) {
        std::size_t shortest = 0;
        for (std::size_t i = 1; i < segments.size(); ++i) {
            if (segments[i].length() < segments[shortest].length()) shortest = i;
        }
        if (segments[shortest].length() >= w) break;
        std::size_t neighbour;
        if (shortest == 0) {
            neighbour = 1;
        } else if (shortest + 1 == segments.size()) {
            neighbour = shortest - 1;
        } else {
            const double d_prev = std::fabs(segments[shortest - 1].mean_counts - segments[shortest].mean_counts);
            const double d_next = std::fabs(segments[shortest + 1].mean_counts - segments[shortest].mean_counts);
            neighbour = d_prev <= d_next ? shortest - 1 : shortest + 1;
        }
        const std::size_t lo = std::min(shortest, neighbour);
        const std::size_t hi = std::max(shortest, neighbour);
        segments[lo].last_bin = segments[hi].last_bin;
        segments[lo].mean_counts =
            detector_detail::segment_mean(trace.counts, segments[lo].first_bin, segments[lo].last_bin);
        segments.erase(segments.begin() + static_cast<std::ptrdiff_t>(hi));
    }

    for (auto& s : segments) s.atoms = detector_detail::level_of(s.mean_counts, spec);

    // a spurious split inside one level decodes to equal atoms; coalesce
    std::vector<Segment> merged;
    for (const Segment& s : segments) {
        if (!merged.empty() && merged.back().atoms == s.atoms) {
            merged.back().last_bin = s.last_bin;
            merged.back().mean_counts = detector_detail::segment_mean(
                trace.counts, merged.back().first_bin, merged.back().last_bin);
        } else {
            merged.push_back(s);
        }
    }
    return merged;
}

/// The systematic part of the detection: one absolute-scale error drawn per
/// calibration epoch and held fixed across every measurement of a run.
struct CalibrationEpoch {
    double scale_error = 0.0; ///< multiplies measured numbers by (1 + scale_error)

    static CalibrationEpoch draw(const DetectorSpec& spec, RngStream& stream) {
        CalibrationEpoch epoch;
        epoch.scale_error = spec.calibration_error_rel <= 0.0
                                ? 0.0
                                : stream.uniform(-spec.calibration_error_rel, spec.calibration_error_rel);
        return epoch;
    }
};

/// One fluorescence measurement of true_n atoms: background capture adds a
/// Poisson draw before the calibration scale is applied. Returns
/// signal-equivalent atoms (real-valued).
inline double simulate_measurement(std::uint64_t true_n, const DetectorSpec& spec,
                                   const CalibrationEpoch& epoch, RngStream& stream) {
    spec.validate();
    const double captured = static_cast<double>(stream.poisson(spec.capture_mean));
    return (static_cast<double>(true_n) + captured) * (1.0 + epoch.scale_error);
}

inline double simulate_measurement(std::uint64_t true_n, const DetectorSpec& spec,
                                   const CalibrationEpoch& epoch, std::uint64_t seed) {
    RngStream stream({seed});
    return simulate_measurement(true_n, spec, epoch, stream);
}

/// Result of calibrating the imaging signal against discrete atom levels.
struct ChannelCalibration {
    double signal_per_atom = 0.0;
    double atoms_per_signal_unit = 0.0;
    double rel_std_error = 0.0;
    double background_intercept = 0.0;
    bool within_spec = true; ///< relative error <= 10%
};

/// Least-squares slope of signal vs atom number, forced through the
/// background intercept (the mean signal of the zero-atom entries, when
/// present). signals[i] pairs with apd_levels[i].second = decoded atoms.
inline ChannelCalibration calibrate_channels(const std::vector<double>& signals,
                                             const std::vector<std::pair<double, int>>& apd_levels) {
    if (signals.size() != apd_levels.size()) {
        throw ValidationError("calibrate_channels: signal/level lists must pair up");
    }
    std::vector<int> distinct;
    for (const auto& [sig, n] : apd_levels) {
        (void)sig;
        if (n < 0) throw ValidationError("calibrate_channels: negative atom level");
        if (std::find(distinct.begin(), distinct.end(), n) == distinct.end()) distinct.push_back(n);
    }
    if (distinct.size() < 2) {
        throw InsufficientLevelsError("calibrate_channels: need at least two distinct atom levels");
    }

    ChannelCalibration cal;
    double bg_sum = 0.0;
    std::size_t bg_count = 0;
    for (std::size_t i = 0; i < signals.size(); ++i) {
        if (apd_levels[i].second == 0) {
            bg_sum += signals[i];
            ++bg_count;
        }
    }
    cal.background_intercept = bg_count > 0 ? bg_sum / static_cast<double>(bg_count) : 0.0;

    double sxx = 0.0, sxy = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < signals.size(); ++i) {
        const double n = static_cast<double>(apd_levels[i].second);
        if (n == 0.0) continue;
        const double y = signals[i] - cal.background_intercept;
        sxx += n * n;
        sxy += n * y;
        ++k;
    }
    cal.signal_per_atom = sxy / sxx;
    if (!(cal.signal_per_atom > 0.0)) {
        throw ValidationError("calibrate_channels: non-positive fitted slope");
    }
    cal.atoms_per_signal_unit = 1.0 / cal.signal_per_atom;

    if (k > 1) {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < signals.size(); ++i) {
            const double n = static_cast<double>(apd_levels[i].second);
            if (n == 0.0) continue;
            const double r = signals[i] - cal.background_intercept - cal.signal_per_atom * n;
            ss_res += r * r;
        }
        const double var = ss_res / static_cast<double>(k - 1);
        cal.rel_std_error = std::sqrt(var / sxx) / cal.signal_per_atom;
    }
    cal.within_spec = cal.rel_std_error <= 0.10;
    return cal;
}

} // namespace bosestats
