#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "bosestats/csv.hpp"
#include "bosestats/detector.hpp"
#include "bosestats/errors.hpp"
#include "bosestats/experiment.hpp"
#include "bosestats/noise.hpp"
#include "bosestats/stats.hpp"

namespace bosestats {

/// Scatter of normalized fluctuation vs mean atom number with 68% intervals
/// and the closed-form model curve evaluated at each point.
inline std::string fig3a_csv(const ExperimentResult& result, const FluctModel& model) {
    if (result.per_depth.size() < 2) {
        throw ValidationError("fig3a: need results for at least 2 depths");
    }
    std::string csv = "mean_N,normalized_fluct,ci68_lo,ci68_hi,model_dashed\n";
    for (const DepthResult& d : result.per_depth) {
        const FluctReport& rep = d.report;
        csv += csv_row({csv_num(rep.mean), csv_num(rep.normalized), csv_num(rep.ci68_normalized.lo),
                        csv_num(rep.ci68_normalized.hi),
                        csv_num(model_normalized_fluct(rep.mean, model))});
    }
    return csv;
}

/// Histogram of one depth's sample with the Gaussian fit and the
/// equal-mean Poisson overlay.
inline std::string fig3b_csv(const Sample& sample) {
    if (sample.size() < 1) throw ValidationError("fig3b: empty sample");
    const HistogramResult h = histogram(sample);
    // a zero-spread sample has no meaningful fit; emit a flat zero curve
    const GaussianFit fit =
        sample.size() >= 2 ? gaussian_fit_moments(sample) : GaussianFit{sample.values[0], 0.0};
    const double norm = fit.sigma > 0.0 ? static_cast<double>(h.total) * h.bin_width /
                                              (fit.sigma * std::sqrt(2.0 * kPi))
                                        : 0.0;
    std::string csv = "bin_center,count,gaussian_fit,poisson_overlay\n";
    for (std::size_t b = 0; b < h.centers.size(); ++b) {
        const double d = h.centers[b] - fit.mean;
        const double gauss =
            norm > 0.0 ? norm * std::exp(-d * d / (2.0 * fit.sigma * fit.sigma)) : 0.0;
        csv += csv_row({csv_num(h.centers[b]), csv_num(h.counts[b]), csv_num(gauss),
                        csv_num(h.poisson_overlay[b])});
    }
    return csv;
}

/// The dashed-model curve on its own, over a grid of atom numbers.
inline std::string model_curve_csv(const FluctModel& model, const std::vector<double>& atom_numbers) {
    std::string csv = "N,sigma_rel,sigma_normalized\n";
    for (double n : atom_numbers) {
        csv += csv_row({csv_num(n), csv_num(model_relative_fluct(n, model)),
                        csv_num(model_normalized_fluct(n, model))});
    }
    return csv;
}

inline std::string run_records_csv(const ExperimentResult& result,
                                   const PhysicalConstants& consts) {
    std::string csv = "depth_index,run_index,depth_nK,true_n,measured_n,status\n";
    for (const RunRecord& r : result.records) {
        csv += csv_row({std::to_string(r.depth_index), std::to_string(r.run_index),
                        r.degenerate ? "" : csv_num(consts.joule_to_nK(r.depth)),
                        r.degenerate ? "" : std::to_string(r.true_n),
                        r.degenerate ? "" : csv_num(r.measured_n),
                        r.degenerate ? "degenerate" : "ok"});
    }
    return csv;
}

inline std::string trace_csv(const CountTrace& trace) {
    std::string csv = "bin_index,counts\n";
    for (std::size_t i = 0; i < trace.counts.size(); ++i) {
        csv += csv_row({std::to_string(i), std::to_string(trace.counts[i])});
    }
    return csv;
}

inline CountTrace trace_from_csv(const std::string& content, double bin_duration) {
    CountTrace trace;
    trace.bin_duration = bin_duration;
    std::istringstream in(content);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("bin_index", 0) == 0) continue; // header
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw ValidationError("trace CSV: expected bin_index,counts: " + line);
        }
        const std::string cell = line.substr(comma + 1);
        if (cell.find('-') != std::string::npos) {
            throw ValidationError("trace CSV: counts must be non-negative: " + line);
        }
        try {
            std::size_t used = 0;
            trace.counts.push_back(static_cast<std::uint64_t>(std::stoull(cell, &used)));
            if (used != cell.size() && cell.find_first_not_of(" \r", used) != std::string::npos) {
                throw ValidationError("trace CSV: trailing characters: " + line);
            }
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception&) {
            throw ValidationError("trace CSV: bad count in line: " + line);
        }
    }
    return trace;
}

inline std::string segments_csv(const std::vector<Segment>& segments) {
    std::string csv = "start_bin,end_bin,n_atoms\n";
    for (const Segment& s : segments) {
        csv += csv_row({std::to_string(s.first_bin), std::to_string(s.last_bin),
                        std::to_string(s.atoms)});
    }
    return csv;
}

/// One value per line (a leading non-numeric header line is tolerated).
inline Sample sample_from_csv(const std::string& content) {
    Sample sample;
    std::istringstream in(content);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            std::size_t used = 0;
            const double v = std::stod(line, &used);
            if (line.find_first_not_of(" \t", used) != std::string::npos) {
                throw ValidationError("sample CSV: trailing characters: " + line);
            }
            sample.values.push_back(v);
        } catch (const ValidationError&) {
            if (first) {
                first = false;
                continue;
            }
            throw;
        } catch (const std::exception&) {
            if (first) {
                first = false;
                continue;
            }
            throw ValidationError("sample CSV: not a number: " + line);
        }
        first = false;
    }
    return sample;
}

/// 1-D potential scans through the trap minimum along all three axes.
inline std::string trap_scan_csv(const TrapConfig& cfg) {
    const MinimumResult min = find_minimum(cfg);
    const TrapEvaluator eval(cfg);
    std::string csv = "axis,position_um,energy_nK\n";
    for (Axis axis : {Axis::x, Axis::y, Axis::z}) {
        const double lo = cfg.region.lo(axis);
        const double hi = cfg.region.hi(axis);
        const int points = 801;
        for (int i = 0; i < points; ++i) {
            Vec3 p = min.point;
            p[axis] = lo + (hi - lo) * i / (points - 1);
            csv += csv_row({axis_name(axis), csv_num(m_to_um(p[axis])),
                            csv_num(cfg.constants.joule_to_nK(eval(p) - min.energy))});
        }
    }
    return csv;
}

} // namespace bosestats
