#include <doctest.h>

#include <cmath>

#include "bosestats/constants.hpp"
#include "bosestats/trap.hpp"
#include "test_configs.hpp"

using namespace bosestats;

TEST_SUITE("trap") {

TEST_CASE("single sheet: peak value and 1/e^2 falloff") {
    TrapConfig cfg;
    cfg.gravity_enabled = false;
    cfg.alpha = 5e-37;
    SheetBeam s;
    s.confinement_axis = Axis::x;
    s.wide_axis = Axis::y;
    s.center_offset = 0.0;
    s.power = 1e-3;
    s.waist_tight = 2.5e-6;
    s.waist_wide = 100e-6;
    cfg.sheets.push_back(s);

    const double peak = cfg.alpha * 2.0 * s.power / (kPi * s.waist_tight * s.waist_wide);
    CHECK(potential_at(cfg, {0, 0, 0}) == doctest::Approx(peak).epsilon(1e-14));
    CHECK(potential_at(cfg, {s.waist_tight, 0, 0}) ==
          doctest::Approx(peak * std::exp(-2.0)).epsilon(1e-14));
    CHECK(potential_at(cfg, {0, s.waist_wide, 0}) ==
          doctest::Approx(peak * std::exp(-2.0)).epsilon(1e-14));
    // no dependence on the propagation coordinate
    CHECK(potential_at(cfg, {0, 0, 123e-6}) == doctest::Approx(peak).epsilon(1e-14));
}

TEST_CASE("optical potential is linear in alpha and in powers (gravity off)") {
    TrapConfig cfg = testcfg::box_trap();
    const Vec3 p{0.7e-6, -0.4e-6, 1.1e-6};
    const double base = potential_at(cfg, p);

    TrapConfig scaled_alpha = cfg;
    scaled_alpha.alpha *= 3.7;
    CHECK(potential_at(scaled_alpha, p) == doctest::Approx(3.7 * base).epsilon(1e-12));

    TrapConfig scaled_power = cfg;
    for (auto& s : scaled_power.sheets) s.power *= 0.31;
    CHECK(potential_at(scaled_power, p) == doctest::Approx(0.31 * base).epsilon(1e-12));
}

TEST_CASE("potential is finite and non-negative without gravity") {
    const TrapConfig cfg = testcfg::box_trap();
    for (double x = -4e-6; x <= 4e-6; x += 0.5e-6) {
        for (double z = -8e-6; z <= 8e-6; z += 1e-6) {
            const double u = potential_at(cfg, {x, 0.3e-6, z});
            CHECK(std::isfinite(u));
            CHECK(u >= 0.0);
        }
    }
}

TEST_CASE("symmetric box trap has its minimum at the origin") {
    const TrapConfig cfg = testcfg::box_trap();
    const MinimumResult min = find_minimum(cfg);
    CHECK(std::fabs(min.point[0]) < 1e-9);
    CHECK(std::fabs(min.point[1]) < 1e-9);
    CHECK(std::fabs(min.point[2]) < 1e-9);
}

TEST_CASE("gravity drags the minimum down but not below the lower wall") {
    TrapConfig cfg = testcfg::box_trap(0.2e-3, 0.2e-3, 2e-3);
    const double z_off = find_minimum(cfg).point[2];

    cfg.gravity_enabled = true;
    const MinimumResult with_gravity = find_minimum(cfg);
    CHECK(with_gravity.point[2] < z_off);
    CHECK(with_gravity.point[2] > -2.5e-6); // above the lower z sheet center
}

TEST_CASE("standard trap minimum agrees with a brute-force grid scan") {
    const TrapConfig cfg = TrapConfig::standard();
    const MinimumResult min = find_minimum(cfg);

    // 0.05 um grid over the +-4 um box around the trap center (the
    // potential keeps falling without bound below the horizontal sheet, so
    // the scan covers the well's neighbourhood, not the spill region)
    const TrapEvaluator eval(cfg);
    const double step = 0.05e-6;
    Vec3 best;
    double best_u = 1e300;
    for (double x = -4e-6; x <= 4e-6 + 1e-12; x += step) {
        for (double y = -4e-6; y <= 4e-6 + 1e-12; y += step) {
            for (double z = -2e-6; z <= 4e-6 + 1e-12; z += step) {
                const double u = eval({x, y, z});
                if (u < best_u) {
                    best_u = u;
                    best = {x, y, z};
                }
            }
        }
    }
    for (int d = 0; d < 3; ++d) CHECK(std::fabs(min.point[d] - best[d]) <= step);
    CHECK(min.energy <= best_u + 1e-40);
}

TEST_CASE("find_minimum is mirror-invariant to 1 nm") {
    const TrapConfig cfg = TrapConfig::standard();
    TrapConfig mirrored = cfg;
    for (auto& s : mirrored.sheets) {
        if (s.confinement_axis == Axis::x) s.center_offset = -s.center_offset;
    }
    const MinimumResult a = find_minimum(cfg, {0.4e-6, 0, 0});
    const MinimumResult b = find_minimum(mirrored, {-0.4e-6, 0, 0});
    CHECK(std::fabs(a.point[0] + b.point[0]) < 1e-9);
    CHECK(std::fabs(a.point[1] - b.point[1]) < 1e-9);
    CHECK(std::fabs(a.point[2] - b.point[2]) < 1e-9);
}

TEST_CASE("find_minimum reports escape when gravity beats the lower sheet") {
    TrapConfig cfg = TrapConfig::standard();
    for (auto& s : cfg.sheets) {
        if (s.confinement_axis == Axis::z) s.power = 1e-6; // far too weak
    }
    CHECK_THROWS_AS(find_minimum(cfg), NoMinimumError);
}

TEST_CASE("find_minimum rejects a guess outside the search region") {
    const TrapConfig cfg = TrapConfig::standard();
    CHECK_THROWS_AS(find_minimum(cfg, {10e-6, 0, 0}), ValidationError);
}

TEST_CASE("a scan with no rise on either side reports no barrier") {
    // synthetic dome: decreasing away from the scan origin along x
    const auto dome = [](const Vec3& p) { return -p[0] * p[0]; };
    SearchRegion region;
    const MinimumResult fake{{0, 0, 0}, 0.0};
    CHECK_THROWS_AS(trap_detail::scan_barrier(dome, region, fake, Axis::x), NoBarrierError);
}

TEST_CASE("x barrier is monotone in the x power") {
    const TrapConfig base = TrapConfig::standard();
    double prev = 0.0;
    for (int i = 1; i <= 10; ++i) {
        TrapConfig cfg = base;
        for (auto& s : cfg.sheets) {
            if (s.confinement_axis == Axis::x) s.power = i * 0.05e-3;
        }
        const double b = barrier_height(cfg, Axis::x);
        CHECK(b >= prev);
        prev = b;
    }
}

TEST_CASE("barrier vanishes with the wall power") {
    // flat-walled box: the other sheets exert no force along x, so the x
    // wall can be made arbitrarily weak without losing the minimum
    TrapConfig cfg = testcfg::separable_box_trap();
    for (auto& s : cfg.sheets) {
        if (s.confinement_axis == Axis::x) s.power = 1e-8; // 10 nW
    }
    const double b = barrier_height(cfg, Axis::x);
    CHECK(cfg.constants.joule_to_nK(b) < 0.01);

    // on the full gravito-optical trap the wall power cannot reach zero
    // without dropping the x minimum entirely
    TrapConfig bare = TrapConfig::standard();
    for (auto& s : bare.sheets) {
        if (s.confinement_axis == Axis::x) s.power = 0.0;
    }
    CHECK_THROWS_AS(find_minimum(bare), NoMinimumError);
}

TEST_CASE("doubling alpha doubles every barrier without gravity") {
    TrapConfig cfg = testcfg::box_trap(0.2e-3, 0.3e-3, 0.4e-3);
    TrapConfig doubled = cfg;
    doubled.alpha *= 2.0;
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
        CHECK(barrier_height(doubled, a) ==
              doctest::Approx(2.0 * barrier_height(cfg, a)).epsilon(1e-9));
    }
}

TEST_CASE("frequencies of an injected exact harmonic potential") {
    const PhysicalConstants consts;
    const double wx = 2.0 * kPi * 180.0, wy = 2.0 * kPi * 410.0, wz = 2.0 * kPi * 330.0;
    const auto harmonic = [&](const Vec3& p) {
        return 0.5 * consts.atom_mass *
               (wx * wx * p[0] * p[0] + wy * wy * p[1] * p[1] + wz * wz * p[2] * p[2]);
    };
    const TrapFrequencies f = frequencies_at(harmonic, Vec3{}, consts.atom_mass);
    CHECK(f.omega[0] == doctest::Approx(wx).epsilon(1e-3));
    CHECK(f.omega[1] == doctest::Approx(wy).epsilon(1e-3));
    CHECK(f.omega[2] == doctest::Approx(wz).epsilon(1e-3));
    CHECK(f.mean == doctest::Approx(std::cbrt(wx * wy * wz)).epsilon(1e-3));
}

TEST_CASE("a saddle is rejected as not a minimum") {
    const auto saddle = [](const Vec3& p) {
        return p[0] * p[0] + p[1] * p[1] - p[2] * p[2];
    };
    CHECK_THROWS_AS(frequencies_at(saddle, Vec3{}, 1.0), NotAMinimumError);
}

TEST_CASE("frequencies scale as sqrt of a global power factor (gravity off)") {
    const TrapConfig cfg = testcfg::box_trap();
    TrapConfig scaled = cfg;
    for (auto& s : scaled.sheets) s.power *= 4.0;
    const TrapFrequencies f1 = trap_frequencies(cfg);
    const TrapFrequencies f2 = trap_frequencies(scaled);
    for (int d = 0; d < 3; ++d) CHECK(f2.omega[d] == doctest::Approx(2.0 * f1.omega[d]).epsilon(1e-6));
}

TEST_CASE("calibrate_alpha matches the closed form on a separable geometry") {
    // flat-walled box: the x barrier is alpha times the peak-intensity
    // difference along x, which can be inverted by hand
    const TrapConfig cfg = testcfg::separable_box_trap();
    const double anchor_power = 0.2e-3;
    const double anchor_depth = cfg.constants.nK_to_joule(22.0);

    TrapConfig probe = cfg;
    for (auto& s : probe.sheets) {
        if (s.confinement_axis == Axis::x) s.power = anchor_power;
    }
    probe.alpha = 1.0; // intensity units
    const TrapEvaluator eval(probe);
    const MinimumResult min = find_minimum(probe);
    const BarrierScan scan = trap_detail::scan_barrier(eval, probe.region, min, Axis::x);
    const double intensity_difference = scan.height; // alpha = 1

    const double closed_form = anchor_depth / intensity_difference;
    const double fitted = calibrate_alpha(cfg, anchor_power, anchor_depth);
    CHECK(fitted == doctest::Approx(closed_form).epsilon(1e-6));
}

TEST_CASE("calibrated alpha reproduces the anchor depth") {
    TrapConfig cfg = TrapConfig::standard();
    const double anchor = cfg.constants.nK_to_joule(22.0);
    cfg.alpha = calibrate_alpha(cfg, 0.2e-3, anchor);
    const double replay = barrier_height(cfg, Axis::x);
    CHECK(cfg.constants.joule_to_nK(replay) == doctest::Approx(22.0).epsilon(0.1 / 22.0));
}

TEST_CASE("the shipped standard configuration is already on the anchor") {
    const TrapConfig cfg = TrapConfig::standard();
    const double b = barrier_height(cfg, Axis::x);
    CHECK(cfg.constants.joule_to_nK(b) == doctest::Approx(22.0).epsilon(0.1 / 22.0));
}

TEST_CASE("standard trap: x is the shallowest axis and frequencies are sane") {
    const TrapConfig cfg = TrapConfig::standard();
    const TrapShape shape = trap_shape(cfg);
    CHECK(shape.barrier[0] < shape.barrier[1]);
    CHECK(shape.barrier[0] < shape.barrier[2]);
    const double mean_hz = radps_to_hz(shape.frequencies.mean);
    CHECK(mean_hz > 150.0);
    CHECK(mean_hz < 600.0);
}

TEST_CASE("calibrate_alpha rejects degenerate anchors") {
    const TrapConfig cfg = TrapConfig::standard();
    CHECK_THROWS_AS(calibrate_alpha(cfg, 0.2e-3, 0.0), ValidationError);
    CHECK_THROWS_AS(calibrate_alpha(cfg, 0.0, 1e-30), ValidationError);
}

TEST_CASE("calibrate_alpha reports bracket failure for impossible depths") {
    const TrapConfig cfg = TrapConfig::standard();
    // no alpha in [1e-40, 1e-30] produces a kelvin-deep barrier at 0.2 mW
    CHECK_THROWS_AS(calibrate_alpha(cfg, 0.2e-3, cfg.constants.nK_to_joule(1e12)),
                    BracketFailureError);
}

} // TEST_SUITE
