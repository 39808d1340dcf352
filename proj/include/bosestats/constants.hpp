#pragma once

#include <cmath>

#include "bosestats/errors.hpp"

namespace bosestats {

inline constexpr double kPi = 3.14159265358979323846;

/// Fundamental constants plus the species-dependent numbers the trap and
/// condensate models need. Defaults are for 87Rb.
struct PhysicalConstants {
    double atom_mass = 1.44316e-25;        ///< kg
    double gravity_accel = 9.80665;        ///< m/s^2
    double boltzmann = 1.380649e-23;       ///< J/K
    double hbar = 1.054571817e-34;         ///< J s
    double scattering_length = 5.2e-9;     ///< m (~98 Bohr radii)

    void validate() const {
        if (!(atom_mass > 0.0) || !(gravity_accel > 0.0) || !(boltzmann > 0.0) ||
            !(hbar > 0.0) || !(scattering_length > 0.0)) {
            throw ValidationError("physical constants must all be strictly positive");
        }
    }

    /// Contact interaction strength g = 4 pi hbar^2 a_s / m, in J m^3.
    double interaction_strength() const {
        return 4.0 * kPi * hbar * hbar * scattering_length / atom_mass;
    }

    double nK_to_joule(double t_nK) const { return t_nK * 1e-9 * boltzmann; }
    double joule_to_nK(double e) const { return e / (1e-9 * boltzmann); }
};

// Presentation-unit helpers. All internal computation is SI.
inline double m_to_um(double x) { return x * 1e6; }
inline double um_to_m(double x) { return x * 1e-6; }
inline double w_to_mw(double p) { return p * 1e3; }
inline double mw_to_w(double p) { return p * 1e-3; }
inline double s_to_ms(double t) { return t * 1e3; }
inline double ms_to_s(double t) { return t * 1e-3; }
inline double radps_to_hz(double w) { return w / (2.0 * kPi); }

} // namespace bosestats
