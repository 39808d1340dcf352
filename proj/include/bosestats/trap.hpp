#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bosestats/constants.hpp"
#include "bosestats/errors.hpp"
#include "bosestats/neldermead.hpp"
#include "bosestats/symeig3.hpp"
#include "bosestats/vec3.hpp"

namespace bosestats {

/// One repulsive light sheet: a beam focused tightly along its confinement
/// axis and loosely along its wide axis. Divergence along the propagation
/// axis is neglected (the Rayleigh range of a 2.5 um waist at 532 nm is an
/// order of magnitude larger than the trap region), so the intensity has no
/// dependence on the third coordinate.
struct SheetBeam {
    Axis confinement_axis = Axis::x;
    Axis wide_axis = Axis::y;
    double center_offset = 0.0; ///< m, along the confinement axis
    double power = 0.0;         ///< W
    double waist_tight = 1e-6;  ///< m, 1/e^2 radius along the confinement axis
    double waist_wide = 1e-4;   ///< m, 1/e^2 radius along the wide axis

    void validate() const {
        if (confinement_axis == wide_axis) {
            throw ValidationError("sheet: confinement and wide axes must differ");
        }
        if (!(power >= 0.0)) throw ValidationError("sheet: power must be >= 0");
        if (!(waist_tight > 0.0) || !(waist_wide > 0.0)) {
            throw ValidationError("sheet: waists must be > 0");
        }
    }

    /// Central intensity 2P / (pi w_t w_w), W/m^2.
    double peak_intensity() const { return 2.0 * power / (kPi * waist_tight * waist_wide); }
};

/// Search/scan bounds around the geometric trap center, and the resolution
/// of 1-D barrier scans.
struct SearchRegion {
    double x_half = 4e-6;    ///< m
    double y_half = 4e-6;    ///< m
    double z_lo = -8e-6;     ///< m
    double z_hi = 8e-6;      ///< m
    double scan_step = 1e-8; ///< m

    double lo(Axis a) const {
        switch (a) {
            case Axis::x: return -x_half;
            case Axis::y: return -y_half;
            default: return z_lo;
        }
    }
    double hi(Axis a) const {
        switch (a) {
            case Axis::x: return x_half;
            case Axis::y: return y_half;
            default: return z_hi;
        }
    }
    bool contains(const Vec3& p) const {
        return p[0] >= -x_half && p[0] <= x_half && p[1] >= -y_half && p[1] <= y_half &&
               p[2] >= z_lo && p[2] <= z_hi;
    }
    void validate() const {
        if (!(x_half > 0.0) || !(y_half > 0.0) || !(z_hi > z_lo) || !(scan_step > 0.0)) {
            throw ValidationError("search region: empty box or non-positive scan step");
        }
    }
};

struct TrapConfig {
    std::vector<SheetBeam> sheets;
    double alpha = 0.0; ///< J per (W/m^2); > 0 for blue-detuned (repulsive) light
    bool gravity_enabled = true;
    PhysicalConstants constants;
    SearchRegion region;

    void validate() const {
        if (!(alpha > 0.0)) throw ValidationError("trap: alpha must be > 0 (repulsive sheets)");
        if (sheets.empty()) throw ValidationError("trap: no sheets");
        for (const auto& s : sheets) s.validate();
        constants.validate();
        region.validate();
    }

    /// The five-sheet operating configuration: an x pair (5 um apart) and a
    /// y pair of 2.5 x 100 um sheets propagating vertically, plus one
    /// 3.4 x 200 um horizontal sheet 3 um below center holding the atoms
    /// against gravity. alpha is pre-calibrated so the x barrier at
    /// 0.2 mW per sheet equals 22 nK * k_B; powers of the deeper axes are
    /// chosen to keep x the shallowest direction with a geometric mean
    /// frequency near 2 pi several hundred Hz.
    static TrapConfig standard();
};

/// Flattened, precomputed view of a TrapConfig for fast repeated evaluation.
class TrapEvaluator {
public:
    explicit TrapEvaluator(const TrapConfig& cfg)
        : count_(cfg.sheets.size()),
          mg_(cfg.gravity_enabled ? cfg.constants.atom_mass * cfg.constants.gravity_accel : 0.0) {
        if (count_ > kMaxSheets) throw ValidationError("trap: too many sheets");
        for (std::size_t i = 0; i < count_; ++i) {
            const SheetBeam& s = cfg.sheets[i];
            Term& t = terms_[i];
            t.tight_index = axis_index(s.confinement_axis);
            t.wide_index = axis_index(s.wide_axis);
            t.tight_center = s.center_offset;
            t.inv_wt2 = 2.0 / (s.waist_tight * s.waist_tight);
            t.inv_ww2 = 2.0 / (s.waist_wide * s.waist_wide);
            t.amplitude = cfg.alpha * s.peak_intensity();
        }
    }

    double operator()(const Vec3& p) const {
        double u = mg_ * p[2];
        for (std::size_t i = 0; i < count_; ++i) {
            const Term& t = terms_[i];
            const double dt = p[t.tight_index] - t.tight_center;
            const double dw = p[t.wide_index];
            u += t.amplitude * std::exp(-(dt * dt * t.inv_wt2 + dw * dw * t.inv_ww2));
        }
        return u;
    }

    /// Optical part only (no gravity), used by linearity checks.
    double optical(const Vec3& p) const {
        double u = 0.0;
        for (std::size_t i = 0; i < count_; ++i) {
            const Term& t = terms_[i];
            const double dt = p[t.tight_index] - t.tight_center;
            const double dw = p[t.wide_index];
            u += t.amplitude * std::exp(-(dt * dt * t.inv_wt2 + dw * dw * t.inv_ww2));
        }
        return u;
    }

private:
    static constexpr std::size_t kMaxSheets = 12;
    struct Term {
        int tight_index = 0;
        int wide_index = 1;
        double tight_center = 0.0;
        double inv_wt2 = 0.0;
        double inv_ww2 = 0.0;
        double amplitude = 0.0;
    };
    std::array<Term, kMaxSheets> terms_{};
    std::size_t count_;
    double mg_;
};

/// Total potential energy (optical sheets + gravity if enabled) at p, in J.
inline double potential_at(const TrapConfig& cfg, const Vec3& p) { return TrapEvaluator(cfg)(p); }

struct MinimumResult {
    Vec3 point;
    double energy = 0.0;
};

namespace trap_detail {

inline constexpr double kProbeStep = 1e-8;       ///< m, post-check probes
inline constexpr double kGradientStep = 1e-9;    ///< m, central-difference gradient
inline constexpr double kGradientTolAbs = 1e-27; ///< J/m, floor for flat directions
inline constexpr double kStationaryTol = 1e-10;  ///< m, |grad|/curvature displacement bound

template <class F>
MinimumResult minimize_potential(F&& f, const SearchRegion& region, const Vec3& guess) {
    if (!region.contains(guess)) {
        throw ValidationError("find_minimum: guess outside the search region");
    }
    const auto inside = [&region](const Vec3& p) { return region.contains(p); };
    NelderMeadResult run = nelder_mead(f, inside, guess, 0.3e-6, 1e-12);
    if (run.escaped) {
        throw NoMinimumError("find_minimum: search escaped the bounding region");
    }

    // per-axis Newton polish: the simplex can stall slightly off-center in
    // stiff directions when the axes are very anisotropic
    Vec3 point = run.point;
    const double h = kGradientStep;
    for (int sweep = 0; sweep < 8; ++sweep) {
        double worst_offset = 0.0;
        for (int d = 0; d < 3; ++d) {
            Vec3 fwd = point, bwd = point;
            fwd[d] += h;
            bwd[d] -= h;
            const double fp = f(fwd), fm = f(bwd), f0 = f(point);
            const double grad = (fp - fm) / (2.0 * h);
            const double curv = (fp - 2.0 * f0 + fm) / (h * h);
            if (curv > 0.0) {
                double step = -grad / curv;
                step = std::clamp(step, -kProbeStep, kProbeStep);
                point[d] += step;
                worst_offset = std::max(worst_offset, std::fabs(step));
            }
        }
        if (!region.contains(point)) {
            throw NoMinimumError("find_minimum: search escaped the bounding region");
        }
        if (worst_offset < 0.01 * kStationaryTol) break;
    }
    const double value = f(point);

    // the 10 nm probes and a curvature-scaled gradient bound confirm a
    // genuine stationary minimum
    for (int d = 0; d < 3; ++d) {
        Vec3 fwd = point, bwd = point;
        fwd[d] += kProbeStep;
        bwd[d] -= kProbeStep;
        if (f(fwd) <= value || f(bwd) <= value) {
            throw NoMinimumError("find_minimum: potential does not rise at +-10 nm probe");
        }
        fwd[d] = point[d] + h;
        bwd[d] = point[d] - h;
        const double fp = f(fwd), fm = f(bwd);
        const double grad = (fp - fm) / (2.0 * h);
        const double curv = (fp - 2.0 * value + fm) / (h * h);
        const double tol = std::max(kGradientTolAbs, curv * kStationaryTol);
        if (std::fabs(grad) > tol) {
            throw NoMinimumError("find_minimum: residual gradient above tolerance");
        }
    }
    return {point, value};
}

} // namespace trap_detail

/// Locate a local minimum of the trap potential near `guess`.
inline MinimumResult find_minimum(const TrapConfig& cfg, const Vec3& guess = Vec3{}) {
    cfg.validate();
    const TrapEvaluator eval(cfg);
    return trap_detail::minimize_potential(eval, cfg.region, guess);
}

/// One side of a 1-D barrier scan through the minimum.
struct BarrierSide {
    double max_energy = 0.0;
    double crest_position = 0.0; ///< coordinate along the scanned axis
};

struct BarrierScan {
    double height = 0.0; ///< min(side maxima) - minimum energy, J
    BarrierSide negative;
    BarrierSide positive;
};

namespace trap_detail {

template <class F>
BarrierSide scan_side(F&& f, const MinimumResult& min, Axis axis, int direction, double bound,
                      double step) {
    BarrierSide side;
    side.max_energy = min.energy;
    side.crest_position = min.point[axis];
    Vec3 p = min.point;
    const double start = min.point[axis];
    const double span = (bound - start) * direction;
    const long steps = static_cast<long>(std::floor(span / step));
    for (long k = 1; k <= steps; ++k) {
        p[axis] = start + direction * k * step;
        const double u = f(p);
        if (u > side.max_energy) {
            side.max_energy = u;
            side.crest_position = p[axis];
        }
    }
    return side;
}

template <class F>
BarrierScan scan_barrier(F&& f, const SearchRegion& region, const MinimumResult& min, Axis axis) {
    BarrierScan scan;
    scan.negative = scan_side(f, min, axis, -1, region.lo(axis), region.scan_step);
    scan.positive = scan_side(f, min, axis, +1, region.hi(axis), region.scan_step);
    scan.height = std::min(scan.negative.max_energy, scan.positive.max_energy) - min.energy;
    if (!(scan.height > 0.0)) {
        throw NoBarrierError(std::string("barrier_height: potential is non-increasing on both sides of the ") +
                             axis_name(axis) + " axis");
    }
    return scan;
}

} // namespace trap_detail

inline BarrierScan barrier_scan(const TrapConfig& cfg, const MinimumResult& min, Axis axis) {
    const TrapEvaluator eval(cfg);
    return trap_detail::scan_barrier(eval, cfg.region, min, axis);
}

/// Barrier height above the trap minimum along one axis, J. Scans the
/// potential from the minimum to the region bound in both directions and
/// takes the lower of the two side maxima.
inline double barrier_height(const TrapConfig& cfg, Axis axis) {
    const MinimumResult min = find_minimum(cfg);
    return barrier_scan(cfg, min, axis).height;
}

struct TrapFrequencies {
    std::array<double, 3> omega{}; ///< rad/s, labelled x, y, z
    double mean = 0.0;             ///< geometric mean
};

namespace trap_detail {

inline constexpr double kHessianStep = 2e-8; ///< m

/// Trap frequencies from a finite-difference Hessian of an arbitrary
/// potential at a given minimum. Eigenfrequencies are labelled by the
/// dominant axis of their eigenvector.
template <class F>
TrapFrequencies frequencies_at(F&& f, const Vec3& at, double mass, double step = kHessianStep) {
    const double f0 = f(at);
    std::array<std::array<double, 3>, 3> h{};
    for (int i = 0; i < 3; ++i) {
        Vec3 a = at, b = at;
        a[i] += step;
        b[i] -= step;
        h[i][i] = (f(a) - 2.0 * f0 + f(b)) / (step * step);
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            Vec3 pp = at, pm = at, mp = at, mm = at;
            pp[i] += step; pp[j] += step;
            pm[i] += step; pm[j] -= step;
            mp[i] -= step; mp[j] += step;
            mm[i] -= step; mm[j] -= step;
            h[i][j] = h[j][i] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step * step);
        }
    }

    const SymEig3 eig = sym_eig3(h);
    for (double lambda : eig.values) {
        if (!(lambda > 0.0)) {
            throw NotAMinimumError("trap_frequencies: Hessian is not positive definite");
        }
    }

    TrapFrequencies out;
    std::array<bool, 3> taken = {false, false, false};
    for (int i = 0; i < 3; ++i) {
        int best = -1;
        double best_mag = -1.0;
        for (int k = 0; k < 3; ++k) {
            const double mag = std::fabs(eig.vectors[i][k]);
            if (!taken[k] && mag > best_mag) {
                best_mag = mag;
                best = k;
            }
        }
        taken[best] = true;
        out.omega[best] = std::sqrt(eig.values[i] / mass);
    }
    out.mean = std::cbrt(out.omega[0] * out.omega[1] * out.omega[2]);
    return out;
}

} // namespace trap_detail

using trap_detail::frequencies_at;

/// Trap frequencies at the potential minimum of cfg.
inline TrapFrequencies trap_frequencies(const TrapConfig& cfg) {
    const MinimumResult min = find_minimum(cfg);
    const TrapEvaluator eval(cfg);
    return frequencies_at(eval, min.point, cfg.constants.atom_mass);
}

/// Everything the CLI reports about the static trap.
struct TrapShape {
    Vec3 minimum_point;
    double minimum_energy = 0.0;
    std::array<double, 3> barrier{}; ///< J, per axis
    TrapFrequencies frequencies;
};

inline TrapShape trap_shape(const TrapConfig& cfg) {
    TrapShape shape;
    const MinimumResult min = find_minimum(cfg);
    shape.minimum_point = min.point;
    shape.minimum_energy = min.energy;
    const TrapEvaluator eval(cfg);
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
        shape.barrier[axis_index(a)] = trap_detail::scan_barrier(eval, cfg.region, min, a).height;
    }
    shape.frequencies = frequencies_at(eval, min.point, cfg.constants.atom_mass);
    return shape;
}

namespace trap_detail {

inline TrapConfig with_pair_power(const TrapConfig& cfg, Axis axis, double power) {
    TrapConfig out = cfg;
    for (auto& s : out.sheets) {
        if (s.confinement_axis == axis) s.power = power;
    }
    return out;
}

} // namespace trap_detail

/// Solve for the intensity-to-energy coefficient that makes the x barrier
/// equal anchor_depth when both x sheets run at anchor_power. Log-space
/// bisection over alpha in [1e-40, 1e-30]; configurations whose trap
/// collapses during the scan count as "barrier below anchor".
inline double calibrate_alpha(const TrapConfig& cfg, double anchor_power, double anchor_depth,
                              double rel_tol = 1e-6) {
    if (!(anchor_depth > 0.0)) throw ValidationError("calibrate_alpha: anchor depth must be > 0");
    if (!(anchor_power > 0.0)) throw ValidationError("calibrate_alpha: anchor power must be > 0");

    const TrapConfig anchored = trap_detail::with_pair_power(cfg, Axis::x, anchor_power);
    const auto barrier_minus_anchor = [&](double alpha) -> double {
        TrapConfig trial = anchored;
        trial.alpha = alpha;
        try {
            return barrier_height(trial, Axis::x) - anchor_depth;
        } catch (const NoMinimumError&) {
            return -anchor_depth;
        } catch (const NoBarrierError&) {
            return -anchor_depth;
        }
    };

    double lo = 1e-40, hi = 1e-30;
    if (!(barrier_minus_anchor(lo) < 0.0) || !(barrier_minus_anchor(hi) > 0.0)) {
        throw BracketFailureError("calibrate_alpha: no sign change over alpha in [1e-40, 1e-30]");
    }
    while (hi / lo - 1.0 > rel_tol) {
        const double mid = std::sqrt(lo * hi);
        if (barrier_minus_anchor(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::sqrt(lo * hi);
}

inline TrapConfig TrapConfig::standard() {
    TrapConfig cfg;
    cfg.gravity_enabled = true;
    // Calibration result for the 22 nK @ 0.2 mW anchor with this geometry;
    // reproduced by calibrate_alpha to the bisection tolerance.
    cfg.alpha = 8.191932e-37;

    SheetBeam sheet;
    sheet.waist_tight = 2.5e-6;
    sheet.waist_wide = 100e-6;

    // x pair, 5 um apart, 0.2 mW per sheet at the operating point
    sheet.confinement_axis = Axis::x;
    sheet.wide_axis = Axis::y;
    sheet.power = 0.2e-3;
    sheet.center_offset = -2.5e-6;
    cfg.sheets.push_back(sheet);
    sheet.center_offset = +2.5e-6;
    cfg.sheets.push_back(sheet);

    // y pair, deeper than x
    sheet.confinement_axis = Axis::y;
    sheet.wide_axis = Axis::x;
    sheet.power = 0.44e-3;
    sheet.center_offset = -2.5e-6;
    cfg.sheets.push_back(sheet);
    sheet.center_offset = +2.5e-6;
    cfg.sheets.push_back(sheet);

    // horizontal sheet below the trap center; with gravity it forms the
    // gravito-optical z confinement
    sheet.confinement_axis = Axis::z;
    sheet.wide_axis = Axis::x;
    sheet.power = 12e-3;
    sheet.center_offset = -3e-6;
    sheet.waist_tight = 3.4e-6;
    sheet.waist_wide = 200e-6;
    cfg.sheets.push_back(sheet);

    return cfg;
}

} // namespace bosestats
