#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace bosestats {

/// Spatial axis labels; also used as indices into Vec3.
enum class Axis : int { x = 0, y = 1, z = 2 };

inline constexpr int axis_index(Axis a) { return static_cast<int>(a); }

inline constexpr const char* axis_name(Axis a) {
    switch (a) {
        case Axis::x: return "x";
        case Axis::y: return "y";
        default: return "z";
    }
}

struct Vec3 {
    double v[3] = {0.0, 0.0, 0.0};

    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }
    double& operator[](Axis a) { return v[axis_index(a)]; }
    double operator[](Axis a) const { return v[axis_index(a)]; }

    double x() const { return v[0]; }
    double y() const { return v[1]; }
    double z() const { return v[2]; }

    Vec3 operator+(const Vec3& o) const { return {v[0] + o.v[0], v[1] + o.v[1], v[2] + o.v[2]}; }
    Vec3 operator-(const Vec3& o) const { return {v[0] - o.v[0], v[1] - o.v[1], v[2] - o.v[2]}; }
    Vec3 operator*(double s) const { return {v[0] * s, v[1] * s, v[2] * s}; }

    double norm() const { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

    static Vec3 unit(Axis a) {
        Vec3 e;
        e[a] = 1.0;
        return e;
    }
};

inline Vec3 operator*(double s, const Vec3& p) { return p * s; }

} // namespace bosestats
