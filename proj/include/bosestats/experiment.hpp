#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bosestats/condensate.hpp"
#include "bosestats/detector.hpp"
#include "bosestats/errors.hpp"
#include "bosestats/noise.hpp"
#include "bosestats/rng.hpp"
#include "bosestats/stats.hpp"
#include "bosestats/trap.hpp"

namespace bosestats {

/// Exponential evaporation ramp, shifted so depth(duration) lands on
/// end_depth exactly.
struct RampSchedule {
    double start_depth = 0.0; ///< J
    double end_depth = 0.0;   ///< J
    double duration = 1.5;    ///< s
    double tau = 0.5;         ///< s

    void validate() const {
        if (!(duration > 0.0) || !(tau > 0.0)) {
            throw ValidationError("ramp: duration and tau must be > 0");
        }
    }
};

inline double ramp_depth(const RampSchedule& ramp, double t) {
    ramp.validate();
    if (!(t >= 0.0 && t <= ramp.duration)) {
        throw ValidationError("ramp_depth: t outside [0, duration]");
    }
    const double decay = std::exp(-t / ramp.tau);
    const double end_decay = std::exp(-ramp.duration / ramp.tau);
    return ramp.end_depth +
           (ramp.start_depth - ramp.end_depth) * (decay - end_decay) / (1.0 - end_decay);
}

/// How the source's atom number is drawn from the Thomas-Fermi value. The
/// trap-depth mechanism itself fixes only the mean; the statistics of the
/// source are pluggable.
enum class SourceModel {
    Deterministic, ///< round(N)
    Poisson,       ///< Poisson(N)
    CustomVariance ///< Gaussian with variance = ratio * N, rounded, clamped at 0
};

struct SourceSpec {
    SourceModel model = SourceModel::Deterministic;
    double variance_ratio = 1.0; ///< only used by CustomVariance

    void validate() const {
        if (model == SourceModel::CustomVariance && !(variance_ratio >= 0.0)) {
            throw ValidationError("source: variance ratio must be >= 0");
        }
    }
};

struct ExperimentPlan {
    TrapConfig trap = TrapConfig::standard();
    NoiseSpec noise;
    DetectorSpec detector;
    FluctModel model;          ///< drives the dashed model curve of the figure
    std::vector<double> depths; ///< target trap depths U0, J
    int runs_per_depth = 100;
    SourceSpec source;
    std::uint64_t master_seed = 1;
    int threads = 1;
    std::optional<RampSchedule> ramp; ///< bookkeeping only

    void validate() const {
        trap.validate();
        noise.validate();
        detector.validate();
        model.validate();
        source.validate();
        if (ramp) ramp->validate();
        if (runs_per_depth < 2) throw ValidationError("plan: need at least 2 runs per depth");
        if (depths.empty()) throw ValidationError("plan: no depths");
        const double lo = trap.constants.nK_to_joule(5.0);
        const double hi = trap.constants.nK_to_joule(100.0);
        for (double d : depths) {
            if (!(d >= lo && d <= hi)) {
                throw ValidationError("plan: depths must lie within [5, 100] nK * k_B");
            }
        }
        if (threads < 1) throw ValidationError("plan: threads must be >= 1");
    }
};

/// One simulated shot; reproducible bit-exactly from
/// (master_seed, depth_index, run_index).
struct RunRecord {
    int depth_index = 0;
    int run_index = 0;
    double depth = 0.0;      ///< realized trap depth of this shot, J
    std::uint64_t true_n = 0;
    double measured_n = 0.0;
    bool degenerate = false;
};

struct DepthResult {
    double target_depth = 0.0;  ///< J
    double nominal_power = 0.0; ///< W per x sheet reaching the target depth
    double mean_true_n = 0.0;
    Sample sample; ///< measured numbers, run order
    FluctReport report;
    int degenerate = 0;
};

struct ExperimentResult {
    std::vector<RunRecord> records; ///< depth-major, run order
    std::vector<DepthResult> per_depth;
    double epoch_scale_error = 0.0;
};

/// x-sheet power at which the x barrier equals target_depth. Bisection over
/// the power range; the depth grows monotonically with power.
inline double power_for_depth(const TrapConfig& cfg, double target_depth,
                              double max_power = 25e-3) {
    if (!(target_depth > 0.0)) throw ValidationError("power_for_depth: depth must be > 0");
    const auto depth_minus_target = [&](double power) -> double {
        try {
            return barrier_height(trap_detail::with_pair_power(cfg, Axis::x, power), Axis::x) -
                   target_depth;
        } catch (const NoMinimumError&) {
            return -target_depth;
        } catch (const NoBarrierError&) {
            return -target_depth;
        }
    };
    double lo = 1e-9, hi = max_power;
    if (!(depth_minus_target(lo) < 0.0) || !(depth_minus_target(hi) > 0.0)) {
        throw BracketFailureError("power_for_depth: target depth not reachable within the power range");
    }
    while (hi / lo - 1.0 > 1e-9) {
        const double mid = std::sqrt(lo * hi);
        if (depth_minus_target(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::sqrt(lo * hi);
}

/// Trap depth at which the (noise-free) chain yields target_n atoms.
inline double depth_for_atom_number(const TrapConfig& cfg, double target_n, double depth_lo_nK = 5.0,
                                    double depth_hi_nK = 100.0) {
    if (!(target_n > 0.0)) throw ValidationError("depth_for_atom_number: target must be > 0");
    const auto n_at_depth = [&](double depth) {
        TrapConfig trial = trap_detail::with_pair_power(cfg, Axis::x, power_for_depth(cfg, depth));
        const MinimumResult min = find_minimum(trial);
        return atom_number_at(trial, min, min.energy + depth);
    };
    double lo = cfg.constants.nK_to_joule(depth_lo_nK);
    double hi = cfg.constants.nK_to_joule(depth_hi_nK);
    if (n_at_depth(lo) > target_n || n_at_depth(hi) < target_n) {
        throw BracketFailureError("depth_for_atom_number: target outside the depth range");
    }
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (n_at_depth(mid) < target_n) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-4 * hi) break;
    }
    return 0.5 * (lo + hi);
}

namespace experiment_detail {

// stream channels under (master_seed, depth, run)
inline constexpr std::uint64_t kChannelNoise = 0;
inline constexpr std::uint64_t kChannelSource = 1;
inline constexpr std::uint64_t kChannelDetect = 2;
inline constexpr std::uint64_t kChannelCalibration = 0xCA11B8A7E;

inline std::uint64_t draw_source(double n_real, const SourceSpec& source, RngStream& stream) {
    switch (source.model) {
        case SourceModel::Deterministic:
            return static_cast<std::uint64_t>(std::llround(n_real));
        case SourceModel::Poisson:
            return stream.poisson(n_real);
        default: {
            const double drawn =
                n_real + std::sqrt(source.variance_ratio * n_real) * stream.normal();
            const long long rounded = std::llround(drawn);
            return rounded > 0 ? static_cast<std::uint64_t>(rounded) : 0;
        }
    }
}

} // namespace experiment_detail

/// Run the whole virtual experiment: for every (depth, run), sample the
/// technical noise, rebuild the trap, measure its x barrier, pin mu to it,
/// integrate the TF atom number, draw the source, and push the result
/// through the detection model. Each trial owns the stream
/// (master_seed, depth_index, run_index, channel), so output is identical
/// for any thread count.
inline ExperimentResult run_experiment(const ExperimentPlan& plan) {
    plan.validate();

    ExperimentResult result;
    {
        RngStream cal_stream({plan.master_seed, experiment_detail::kChannelCalibration});
        result.epoch_scale_error = CalibrationEpoch::draw(plan.detector, cal_stream).scale_error;
    }
    const CalibrationEpoch epoch{result.epoch_scale_error};

    const int runs = plan.runs_per_depth;
    result.records.resize(plan.depths.size() * static_cast<std::size_t>(runs));

    for (std::size_t d = 0; d < plan.depths.size(); ++d) {
        const double target_depth = plan.depths[d];
        const double nominal_power = power_for_depth(plan.trap, target_depth);
        const TrapConfig nominal =
            trap_detail::with_pair_power(plan.trap, Axis::x, nominal_power);
        const Vec3 nominal_min = find_minimum(nominal).point;

        const auto run_one = [&](int r) {
            RunRecord rec;
            rec.depth_index = static_cast<int>(d);
            rec.run_index = r;

            RngStream noise_stream({plan.master_seed, static_cast<std::uint64_t>(d),
                                    static_cast<std::uint64_t>(r), experiment_detail::kChannelNoise});
            TrapConfig perturbed = nominal;
            for (NoiseParam p : kAllNoiseParams) {
                const double xi = noise_stream.truncated_normal(plan.noise.truncation);
                const double sigma = plan.noise.sigma(p);
                if (sigma > 0.0) perturbed = apply_param(perturbed, p, sigma * xi);
            }

            double n_real = 0.0;
            try {
                const TrapEvaluator eval(perturbed);
                const MinimumResult min =
                    trap_detail::minimize_potential(eval, perturbed.region, nominal_min);
                const WellScan well = well_scan(perturbed, min);
                rec.depth = well.barrier[0];
                if (rec.depth > well.barrier[1] || rec.depth > well.barrier[2]) {
                    // depth = mu only holds while x is the evaporation barrier
                    throw NoBarrierError("run: the x barrier is not the lowest");
                }
                n_real = tf_number_over(eval, min.point, well.box, min.energy + rec.depth,
                                        perturbed.constants.interaction_strength());
            } catch (const NoMinimumError&) {
                rec.degenerate = true;
            } catch (const NoBarrierError&) {
                rec.degenerate = true;
            }

            if (!rec.degenerate) {
                RngStream source_stream({plan.master_seed, static_cast<std::uint64_t>(d),
                                         static_cast<std::uint64_t>(r),
                                         experiment_detail::kChannelSource});
                rec.true_n = experiment_detail::draw_source(n_real, plan.source, source_stream);
                RngStream detect_stream({plan.master_seed, static_cast<std::uint64_t>(d),
                                         static_cast<std::uint64_t>(r),
                                         experiment_detail::kChannelDetect});
                rec.measured_n = simulate_measurement(rec.true_n, plan.detector, epoch, detect_stream);
            }
            result.records[d * static_cast<std::size_t>(runs) + static_cast<std::size_t>(r)] = rec;
        };

        if (plan.threads <= 1) {
            for (int r = 0; r < runs; ++r) run_one(r);
        } else {
            std::vector<std::thread> pool;
            const int chunk = (runs + plan.threads - 1) / plan.threads;
            for (int t = 0; t < plan.threads; ++t) {
                const int begin = t * chunk;
                const int end = std::min(runs, begin + chunk);
                if (begin < end) {
                    pool.emplace_back([&, begin, end] {
                        for (int r = begin; r < end; ++r) run_one(r);
                    });
                }
            }
            for (auto& th : pool) th.join();
        }

        DepthResult depth_result;
        depth_result.target_depth = target_depth;
        depth_result.nominal_power = nominal_power;
        double true_sum = 0.0;
        for (int r = 0; r < runs; ++r) {
            const RunRecord& rec =
                result.records[d * static_cast<std::size_t>(runs) + static_cast<std::size_t>(r)];
            if (rec.degenerate) {
                ++depth_result.degenerate;
            } else {
                depth_result.sample.values.push_back(rec.measured_n);
                true_sum += static_cast<double>(rec.true_n);
            }
        }
        if (depth_result.degenerate * 100 > runs) {
            throw DegenerateRunsError("run_experiment: more than 1% degenerate traps at depth index " +
                                      std::to_string(d));
        }
        depth_result.mean_true_n = true_sum / static_cast<double>(depth_result.sample.size());
        depth_result.report = fluct_report(depth_result.sample, plan.detector.calibration_error_rel);
        result.per_depth.push_back(std::move(depth_result));
    }
    return result;
}

} // namespace bosestats
