#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "bosestats/condensate.hpp"
#include "bosestats/errors.hpp"
#include "bosestats/rng.hpp"
#include "bosestats/trap.hpp"

namespace bosestats {

/// The five technical parameters whose fluctuations move the atom number:
/// the three sheet powers and the two pair separations.
enum class NoiseParam : int { Px = 0, Py = 1, Pz = 2, Lx = 3, Ly = 4 };

inline constexpr std::array<NoiseParam, 5> kAllNoiseParams = {
    NoiseParam::Px, NoiseParam::Py, NoiseParam::Pz, NoiseParam::Lx, NoiseParam::Ly};

inline constexpr const char* noise_param_name(NoiseParam p) {
    switch (p) {
        case NoiseParam::Px: return "P_x";
        case NoiseParam::Py: return "P_y";
        case NoiseParam::Pz: return "P_z";
        case NoiseParam::Lx: return "l_x";
        default: return "l_y";
    }
}

/// Relative standard deviations of the technical parameters. Draws are
/// Gaussian truncated at +-truncation sigma so powers and separations can
/// never go negative.
struct NoiseSpec {
    std::array<double, 5> rel_sigma{}; ///< indexed by NoiseParam
    double truncation = 5.0;

    double& sigma(NoiseParam p) { return rel_sigma[static_cast<int>(p)]; }
    double sigma(NoiseParam p) const { return rel_sigma[static_cast<int>(p)]; }

    void validate() const {
        for (double s : rel_sigma) {
            if (!(s >= 0.0)) throw ValidationError("noise: relative sigmas must be >= 0");
        }
        if (!(truncation > 0.0)) throw ValidationError("noise: truncation must be > 0");
    }
};

/// Apply a relative perturbation of one technical parameter. Power noise is
/// common to a sheet pair (one laser line per pair); separation noise moves
/// the two sheets of a pair apart symmetrically (+-delta/2 each).
inline TrapConfig apply_param(const TrapConfig& cfg, NoiseParam param, double rel_delta) {
    TrapConfig out = cfg;
    const double factor = 1.0 + rel_delta;
    const Axis axis = (param == NoiseParam::Px || param == NoiseParam::Lx)   ? Axis::x
                      : (param == NoiseParam::Py || param == NoiseParam::Ly) ? Axis::y
                                                                             : Axis::z;
    const bool is_power = param == NoiseParam::Px || param == NoiseParam::Py || param == NoiseParam::Pz;
    for (auto& s : out.sheets) {
        if (s.confinement_axis != axis) continue;
        if (is_power) {
            s.power *= factor;
        } else {
            s.center_offset *= factor;
        }
    }
    return out;
}

/// cfg -> atom number. The full chain locates the perturbed minimum, takes
/// the x barrier as the trap depth, pins mu to it, and integrates the TF
/// density. Tests may substitute shortcuts (e.g. a fixed-frequency harmonic
/// model) to isolate one link of the chain.
using NumberChain = std::function<double(const TrapConfig&)>;

inline NumberChain full_number_chain(double quad_rel_tol = 1e-4) {
    return [quad_rel_tol](const TrapConfig& cfg) {
        const MinimumResult min = find_minimum(cfg);
        const WellScan well = well_scan(cfg, min);
        const double depth = well.barrier[0];
        if (depth > well.barrier[1] || depth > well.barrier[2]) {
            // depth = mu only holds while x is the evaporation barrier
            throw NoBarrierError("number chain: the x barrier is not the lowest");
        }
        const TrapEvaluator eval(cfg);
        return tf_number_over(eval, min.point, well.box, min.energy + depth,
                              cfg.constants.interaction_strength(), quad_rel_tol);
    };
}

struct PropagationResult {
    double mc_pct = 0.0;     ///< Monte Carlo std(N)/mean(N), percent
    double linear_pct = 0.0; ///< first-order |dN/dp| sigma_p / N, percent
    int n_samples = 0;
    int degenerate = 0; ///< samples whose trap collapsed (excluded)
};

/// First-order relative sensitivity dln(N)/dln(p) by central difference.
inline double log_sensitivity(const TrapConfig& cfg, NoiseParam param, const NumberChain& chain,
                              double rel_step = 1e-3) {
    const double n0 = chain(cfg);
    if (!(n0 > 0.0)) throw ValidationError("log_sensitivity: nominal atom number is zero");
    const double np = chain(apply_param(cfg, param, +rel_step));
    const double nm = chain(apply_param(cfg, param, -rel_step));
    return (np - nm) / (2.0 * rel_step * n0);
}

/// Monte Carlo propagation of one parameter's relative fluctuation into the
/// relative atom-number fluctuation, with the matching linear estimate.
/// Trial i draws from the stream (seed, i), so results are bit-identical
/// for any worker count.
inline PropagationResult propagate_param(const TrapConfig& cfg, NoiseParam param, double rel_sigma,
                                         int n_samples, std::uint64_t seed,
                                         const NumberChain& chain = full_number_chain(),
                                         double truncation = 5.0, int n_threads = 1) {
    if (n_samples < 100) throw ValidationError("propagate_param: need at least 100 samples");
    if (!(rel_sigma >= 0.0)) throw ValidationError("propagate_param: rel_sigma must be >= 0");

    PropagationResult out;
    out.n_samples = n_samples;
    if (rel_sigma == 0.0) return out;

    std::vector<double> values(static_cast<std::size_t>(n_samples));
    std::vector<char> failed(static_cast<std::size_t>(n_samples), 0);

    const auto worker = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            RngStream stream({seed, static_cast<std::uint64_t>(i)});
            const double delta = rel_sigma * stream.truncated_normal(truncation);
            try {
                values[static_cast<std::size_t>(i)] = chain(apply_param(cfg, param, delta));
            } catch (const NoMinimumError&) {
                failed[static_cast<std::size_t>(i)] = 1;
            } catch (const NoBarrierError&) {
                failed[static_cast<std::size_t>(i)] = 1;
            }
        }
    };
    if (n_threads <= 1) {
        worker(0, n_samples);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n_samples + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(n_samples, begin + chunk);
            if (begin < end) pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    std::vector<double> kept;
    kept.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (failed[i]) {
            ++out.degenerate;
        } else {
            kept.push_back(values[i]);
        }
    }
    if (out.degenerate > n_samples / 100) {
        throw DegenerateRunsError("propagate_param: more than 1% of samples had a degenerate trap");
    }

    const double mean = std::accumulate(kept.begin(), kept.end(), 0.0) / kept.size();
    double ss = 0.0;
    for (double v : kept) ss += (v - mean) * (v - mean);
    const double stddev = std::sqrt(ss / (kept.size() - 1));
    out.mc_pct = 100.0 * stddev / mean;
    out.linear_pct = 100.0 * std::fabs(log_sensitivity(cfg, param, chain, std::max(rel_sigma, 1e-4))) * rel_sigma;
    return out;
}

/// The hardware stability that would produce a given measured contribution:
/// inversion of the linear sensitivity.
inline double implied_sigma(const TrapConfig& cfg, NoiseParam param, double target_contribution_pct,
                            const NumberChain& chain = full_number_chain()) {
    if (!(target_contribution_pct >= 0.0)) {
        throw ValidationError("implied_sigma: target contribution must be >= 0");
    }
    const double sens = std::fabs(log_sensitivity(cfg, param, chain));
    if (!(sens > 0.0)) throw ValidationError("implied_sigma: parameter has no effect on N");
    return target_contribution_pct / 100.0 / sens;
}

/// Combine independent contributions in quadrature.
inline double combine_quadrature(std::span<const double> contributions) {
    double ss = 0.0;
    for (double c : contributions) {
        if (!(c >= 0.0)) throw ValidationError("combine_quadrature: contributions must be >= 0");
        ss += c * c;
    }
    return std::sqrt(ss);
}

inline double combine_quadrature(std::initializer_list<double> contributions) {
    return combine_quadrature(std::span<const double>(contributions.begin(), contributions.size()));
}

/// Closed-form fluctuation model: technical noise plus Poissonian background
/// capture.
struct FluctModel {
    double delta_tech = 0.043;    ///< relative, not percent
    double background_mean = 5.0; ///< atoms per exposure

    void validate() const {
        if (!(delta_tech >= 0.0) || !(background_mean >= 0.0)) {
            throw ValidationError("fluctuation model: parameters must be >= 0");
        }
    }
};

/// sigma_N / N at atom number n: sqrt(delta_tech^2 + N_bg / n^2).
inline double model_relative_fluct(double n, const FluctModel& model) {
    if (!(n > 0.0)) throw ValidationError("model_relative_fluct: n must be > 0");
    return std::sqrt(model.delta_tech * model.delta_tech + model.background_mean / (n * n));
}

/// sigma_N / sqrt(N), the fluctuation normalized to the Poissonian case:
/// sqrt(delta_tech^2 n + N_bg / n).
inline double model_normalized_fluct(double n, const FluctModel& model) {
    if (!(n > 0.0)) throw ValidationError("model_normalized_fluct: n must be > 0");
    return std::sqrt(model.delta_tech * model.delta_tech * n + model.background_mean / n);
}

/// Per-parameter contributions and their quadrature combination.
struct ContributionTable {
    struct Row {
        NoiseParam param;
        double rel_sigma;  ///< input stability (relative)
        double mc_pct;     ///< Monte Carlo contribution
        double linear_pct; ///< linear-sensitivity contribution
        int degenerate;
    };
    std::vector<Row> rows;
    double combined_mc_pct = 0.0;
    double combined_linear_pct = 0.0;
};

inline ContributionTable contribution_table(const TrapConfig& cfg, const NoiseSpec& noise,
                                            int n_samples, std::uint64_t seed,
                                            const NumberChain& chain = full_number_chain(),
                                            int n_threads = 1) {
    noise.validate();
    ContributionTable table;
    std::vector<double> mc, lin;
    for (NoiseParam p : kAllNoiseParams) {
        const double sigma = noise.sigma(p);
        PropagationResult r;
        if (sigma > 0.0) {
            r = propagate_param(cfg, p, sigma, n_samples, seed + static_cast<std::uint64_t>(p),
                                chain, noise.truncation, n_threads);
        }
        table.rows.push_back({p, sigma, r.mc_pct, r.linear_pct, r.degenerate});
        mc.push_back(r.mc_pct);
        lin.push_back(r.linear_pct);
    }
    table.combined_mc_pct = combine_quadrature(mc);
    table.combined_linear_pct = combine_quadrature(lin);
    return table;
}

} // namespace bosestats
