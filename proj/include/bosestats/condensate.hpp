#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "bosestats/constants.hpp"
#include "bosestats/cubature.hpp"
#include "bosestats/errors.hpp"
#include "bosestats/trap.hpp"

namespace bosestats {

/// Chemical potential (absolute, same energy zero as the potential) and the
/// atom number it supports.
struct CondensateState {
    double chemical_potential = 0.0; ///< J
    double atom_number = 0.0;
    double interaction_strength = 0.0; ///< J m^3
};

/// Thomas-Fermi number density max(0, mu - U(p)) / g, 1/m^3. mu is on the
/// absolute energy scale of potential_at.
inline double tf_density(const TrapConfig& cfg, double mu, const Vec3& p) {
    const double g = cfg.constants.interaction_strength();
    return std::max(0.0, mu - potential_at(cfg, p)) / g;
}

/// The well around a minimum: the box clipped at the crest of every axis
/// scan, plus the barrier heights themselves. The density integral never
/// picks up the untrapped volume past a barrier (below the horizontal sheet,
/// or outside the walls once mu approaches the barrier top).
struct WellScan {
    Box3 box;
    std::array<double, 3> barrier{}; ///< J, per axis
};

inline WellScan well_scan(const TrapConfig& cfg, const MinimumResult& min) {
    const TrapEvaluator eval(cfg);
    WellScan well;
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
        const BarrierScan scan = trap_detail::scan_barrier(eval, cfg.region, min, a);
        well.box.lo[a] = scan.negative.crest_position;
        well.box.hi[a] = scan.positive.crest_position;
        well.barrier[axis_index(a)] = scan.height;
    }
    return well;
}

inline Box3 well_region(const TrapConfig& cfg, const MinimumResult& min) {
    return well_scan(cfg, min).box;
}

namespace condensate_detail {

/// One ray of the spherical-shell quadrature: locate the first crossing of
/// U = mu outward from the center (or the box face if none), then integrate
/// the smooth section (mu - U) r^2 by Gauss-Legendre. The integrand
/// vanishes at the far endpoint by construction, so the Thomas-Fermi kink
/// never enters the quadrature.
template <class F>
double ray_integral(F&& potential, const Vec3& center, const Vec3& dir, double t_max, double mu,
                    const GaussLegendre& radial) {
    const auto at = [&](double t) {
        return potential(Vec3{center[0] + t * dir[0], center[1] + t * dir[1],
                              center[2] + t * dir[2]});
    };
    constexpr int kMarchSteps = 10;
    double radius = t_max;
    double lo = 0.0;
    for (int k = 1; k <= kMarchSteps; ++k) {
        const double t = t_max * k / kMarchSteps;
        if (at(t) >= mu) {
            double hi = t;
            for (int iter = 0; iter < 40; ++iter) {
                const double mid = 0.5 * (lo + hi);
                (at(mid) < mu ? lo : hi) = mid;
                if (hi - lo < 1e-6 * t_max) break;
            }
            radius = 0.5 * (lo + hi);
            break;
        }
        lo = t;
    }
    if (radius <= 0.0) return 0.0;

    double sum = 0.0;
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
        const double t = 0.5 * radius * (radial.nodes[i] + 1.0);
        const double f = mu - at(t);
        if (f > 0.0) sum += radial.weights[i] * f * t * t;
    }
    return sum * 0.5 * radius;
}

/// Distance from an interior point to the box boundary along dir.
inline double ray_exit(const Vec3& center, const Vec3& dir, const Box3& box) {
    double t = std::numeric_limits<double>::infinity();
    for (int d = 0; d < 3; ++d) {
        if (dir[d] > 1e-300) {
            t = std::min(t, (box.hi[d] - center[d]) / dir[d]);
        } else if (dir[d] < -1e-300) {
            t = std::min(t, (box.lo[d] - center[d]) / dir[d]);
        }
    }
    return std::max(t, 0.0);
}

/// Per-axis extent of the mu-support from the center, used to normalize the
/// support's anisotropy before the angular quadrature (an oblate support
/// costs the polar rule dearly; a near-spherical one converges fast).
template <class F>
std::array<double, 3> support_scales(F&& potential, const Vec3& center, const Box3& box,
                                     double mu) {
    std::array<double, 3> scale{};
    for (int d = 0; d < 3; ++d) {
        double extent = 0.0;
        for (int side = -1; side <= 1; side += 2) {
            Vec3 dir{};
            dir[d] = static_cast<double>(side);
            const double t_face = ray_exit(center, dir, box);
            double lo = 0.0, hi = t_face;
            Vec3 p = center;
            p[d] = center[d] + side * t_face;
            if (potential(p) < mu) {
                extent = std::max(extent, t_face);
                continue;
            }
            for (int iter = 0; iter < 40; ++iter) {
                const double mid = 0.5 * (lo + hi);
                p[d] = center[d] + side * mid;
                (potential(p) < mu ? lo : hi) = mid;
            }
            extent = std::max(extent, 0.5 * (lo + hi));
        }
        scale[d] = extent;
    }
    // guard degenerate directions; cap the aspect ratio at 100
    double largest = std::max({scale[0], scale[1], scale[2]});
    if (!(largest > 0.0)) largest = 1e-9;
    for (double& s : scale) s = std::max(s, 0.01 * largest);
    return scale;
}

template <class F>
double shell_quadrature(F&& potential, const Vec3& center, const Box3& box, double mu,
                        int n_theta, const GaussLegendre& radial,
                        const std::array<double, 3>& scale) {
    const GaussLegendre polar = gauss_legendre(n_theta);
    const int n_phi = 2 * n_theta;
    const double jacobian = scale[0] * scale[1] * scale[2];
    double total = 0.0;
    for (int i = 0; i < n_theta; ++i) {
        const double cos_t = polar.nodes[i];
        const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
        for (int j = 0; j < n_phi; ++j) {
            const double phi = 2.0 * kPi * j / n_phi;
            // direction in stretched coordinates; physical rays are scaled
            const Vec3 dir{scale[0] * sin_t * std::cos(phi), scale[1] * sin_t * std::sin(phi),
                           scale[2] * cos_t};
            const double t_max = ray_exit(center, dir, box);
            if (t_max <= 0.0) continue;
            total += polar.weights[i] * ray_integral(potential, center, dir, t_max, mu, radial);
        }
    }
    return total * jacobian * (2.0 * kPi / n_phi);
}

} // namespace condensate_detail

/// Generic Thomas-Fermi atom number: quadrature of max(0, mu - potential)/g
/// over the part of the box visible from the center (the potential
/// minimum). Radial sections end exactly on the mu = U surface, and the
/// angular resolution doubles until two consecutive levels agree to
/// rel_tol. The potential is any callable so tests can inject closed-form
/// shapes.
template <class F>
double tf_number_over(F&& potential, const Vec3& center, const Box3& box, double mu, double g_int,
                      double rel_tol = 1e-4) {
    const GaussLegendre radial = gauss_legendre(16);
    const std::array<double, 3> scale =
        condensate_detail::support_scales(potential, center, box, mu);
    double prev = 0.0;
    for (int level = 0; level <= 4; ++level) {
        const int n_theta = 6 << level;
        const double value = condensate_detail::shell_quadrature(potential, center, box, mu,
                                                                 n_theta, radial, scale) /
                             g_int;
        if (level > 0 && std::fabs(value - prev) <= rel_tol * std::fabs(value) + 1e-9) {
            return value;
        }
        prev = value;
    }
    throw QuadratureFailureError("tf_number_over: angular refinement did not converge");
}

/// Atom number at absolute chemical potential mu, reusing an
/// already-located minimum (the Monte Carlo chain calls this once per
/// perturbed trap). Returns a real (unrounded) number.
inline double atom_number_at(const TrapConfig& cfg, const MinimumResult& min, double mu,
                             double rel_tol = 1e-4) {
    if (!(mu > min.energy)) return 0.0;
    const Box3 box = well_region(cfg, min);
    const TrapEvaluator eval(cfg);
    return tf_number_over(eval, min.point, box, mu, cfg.constants.interaction_strength(), rel_tol);
}

/// Atom number of the trapped condensate at absolute chemical potential mu,
/// from adaptive 3-D quadrature of the TF density over the well region.
inline double atom_number(const TrapConfig& cfg, double mu, double rel_tol = 1e-4) {
    const MinimumResult min = find_minimum(cfg);
    return atom_number_at(cfg, min, mu, rel_tol);
}

/// Closed-form Thomas-Fermi number for an isotropic harmonic trap of
/// geometric-mean frequency omega_bar: N = (8 pi / 15) (mu / g) (2 mu / (m
/// omega_bar^2))^(3/2), with mu measured from the trap minimum.
inline double harmonic_tf_number(double mu_above_min, double mean_frequency,
                                 const PhysicalConstants& consts) {
    if (!(mu_above_min >= 0.0)) {
        throw ValidationError("harmonic_tf_number: mu must be >= 0 above the minimum");
    }
    if (mu_above_min == 0.0) return 0.0;
    const double g = consts.interaction_strength();
    const double r2 = 2.0 * mu_above_min / (consts.atom_mass * mean_frequency * mean_frequency);
    return (8.0 * kPi / 15.0) * (mu_above_min / g) * r2 * std::sqrt(r2);
}

/// Invert atom_number: the absolute chemical potential at which the well
/// holds target_n atoms. Bisection over [minimum, minimum + lowest barrier];
/// beyond the lowest barrier the trap cannot hold more atoms. The search
/// evaluates the shell quadrature at one fixed angular resolution, which is
/// exactly monotone in mu, so the 1e-3-atom tolerance is meaningful.
inline double chemical_potential(const TrapConfig& cfg, double target_n,
                                 double abs_tol_atoms = 1e-3) {
    if (!(target_n >= 0.0)) throw ValidationError("chemical_potential: target must be >= 0");
    const MinimumResult min = find_minimum(cfg);
    if (target_n == 0.0) return min.energy;

    const TrapEvaluator eval(cfg);
    double lowest_barrier = std::numeric_limits<double>::infinity();
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
        lowest_barrier = std::min(lowest_barrier, trap_detail::scan_barrier(eval, cfg.region, min, a).height);
    }
    const Box3 box = well_region(cfg, min);
    const double g = cfg.constants.interaction_strength();
    const GaussLegendre radial = gauss_legendre(16);
    // one scale for the whole bracket keeps n_of_mu strictly monotone
    const auto scale = condensate_detail::support_scales(eval, min.point, box,
                                                         min.energy + lowest_barrier);
    const auto n_of_mu = [&](double mu) {
        if (!(mu > min.energy)) return 0.0;
        return condensate_detail::shell_quadrature(eval, min.point, box, mu, 24, radial, scale) / g;
    };

    double lo = min.energy;
    double hi = min.energy + lowest_barrier;
    const double n_hi = n_of_mu(hi);
    if (target_n > n_hi + abs_tol_atoms) {
        throw UnreachableError("chemical_potential: target exceeds the atom number at the lowest barrier");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double n_mid = n_of_mu(mid);
        if (std::fabs(n_mid - target_n) <= abs_tol_atoms) return mid;
        if (n_mid < target_n) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline CondensateState condensate_state(const TrapConfig& cfg, double mu) {
    CondensateState state;
    state.chemical_potential = mu;
    state.atom_number = atom_number(cfg, mu);
    state.interaction_strength = cfg.constants.interaction_strength();
    return state;
}

} // namespace bosestats
