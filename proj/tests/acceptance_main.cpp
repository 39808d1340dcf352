// Acceptance suite: one criterion per check, one [PASS]/[FAIL] line each,
// nonzero exit if anything fails. Criterion 11 drives the installed CLI,
// whose path arrives via --cli.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "bosestats/bosestats.hpp"

namespace bs = bosestats;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_t0;

void begin(const char* name) {
    std::printf("--- %s\n", name);
    std::fflush(stdout);
    g_t0 = std::chrono::steady_clock::now();
}

void verdict(const char* name, bool ok, const std::string& detail) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - g_t0).count();
    std::printf("[%s] %s: %s (%.1f s)\n", ok ? "PASS" : "FAIL", name, detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// 1. quadrature combination of the five measured noise contributions
void criterion_quadrature() {
    begin("1 quadrature combination");
    const double combined = bs::combine_quadrature({2.0, 2.4, 0.1, 2.2, 2.0});
    verdict("1 quadrature combination", std::fabs(combined - 4.31) <= 0.01,
            fmt("combined = %.4f%%, expected 4.31 +- 0.01 (rounds to 4.3)", combined));
}

// 2. closed-form model value at 60 atoms and its unity crossing
void criterion_model_curve() {
    begin("2 dashed-curve model");
    const bs::FluctModel model{0.043, 5.0};
    const double at60 = bs::model_normalized_fluct(60.0, model);
    const double d2 = model.delta_tech * model.delta_tech;
    const double root = (1.0 + std::sqrt(1.0 - 4.0 * d2 * model.background_mean)) / (2.0 * d2);
    const bool ok = std::fabs(at60 - 0.4408) <= 1e-3 && root >= 530.0 && root <= 542.0 &&
                    std::fabs(bs::model_normalized_fluct(root, model) - 1.0) < 1e-9;
    verdict("2 dashed-curve model", ok,
            fmt("value(60) = %.4f (expect 0.4408 +- 0.001), unity crossing at N = %.1f in [530, 542]",
                at60, root));
}

// 3. Poissonian reference with the absolute-accuracy band
void criterion_poisson_reference() {
    begin("3 poisson reference");
    const bs::PoissonReference ref = bs::poisson_reference(60.0, 0.10);
    const double lin_pct = 100.0 * ref.band_linear;
    const double hi_pct = 100.0 * (ref.exact_band.hi - ref.value);
    const double lo_pct = 100.0 * (ref.value - ref.exact_band.lo);
    const bool ok = std::fabs(100.0 * ref.value - 12.91) <= 0.01 && lin_pct > 0.5 &&
                    lin_pct < 0.75 && hi_pct > 0.5 && hi_pct < 0.8 && lo_pct > 0.5 && lo_pct < 0.7;
    verdict("3 poisson reference", ok,
            fmt("value = %.2f%% (expect 12.91), band: linearized +-%.2f%%, exact [-%.2f%%, +%.2f%%];"
                " both conventions sit at the half-percent scale",
                100.0 * ref.value, lin_pct, lo_pct, hi_pct));
}

// 4. alpha calibration lands the barrier on the anchor; frequency sanity
void criterion_calibration() {
    begin("4 trap calibration");
    bs::TrapConfig cfg = bs::TrapConfig::standard();
    cfg.alpha = 5e-37; // start away from the shipped value
    cfg.alpha = bs::calibrate_alpha(cfg, 0.2e-3, cfg.constants.nK_to_joule(22.0));
    const double barrier_nK = cfg.constants.joule_to_nK(bs::barrier_height(cfg, bs::Axis::x));
    const double mean_hz = bs::radps_to_hz(bs::trap_frequencies(cfg).mean);
    const bool ok = std::fabs(barrier_nK - 22.0) <= 0.1 && mean_hz >= 150.0 && mean_hz <= 600.0;
    verdict("4 trap calibration", ok,
            fmt("barrier(P_x = 0.2 mW) = %.4f nK (expect 22.0 +- 0.1), mean frequency %.1f Hz"
                " within [150, 600]",
                barrier_nK, mean_hz));
}

// 5. TF quadrature against the closed form on an injected harmonic trap
void criterion_tf_solver() {
    begin("5 TF solver vs closed form");
    const bs::PhysicalConstants consts;
    const double wbar = 2.0 * bs::kPi * 300.0;
    const double g = consts.interaction_strength();
    const auto harmonic = [&](const bs::Vec3& p) {
        return 0.5 * consts.atom_mass * wbar * wbar *
               (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    };
    const bs::Box3 box{{-3e-6, -3e-6, -3e-6}, {3e-6, 3e-6, 3e-6}};
    double worst = 0.0;
    for (int i = 0; i <= 9; ++i) {
        const double mu = consts.nK_to_joule(5.0 + 45.0 * i / 9.0);
        const double quad = bs::tf_number_over(harmonic, bs::Vec3{}, box, mu, g);
        const double closed = bs::harmonic_tf_number(mu, wbar, consts);
        worst = std::max(worst, std::fabs(quad - closed) / closed);
    }
    const double n22 = bs::harmonic_tf_number(consts.nK_to_joule(22.0), wbar, consts);
    const bool ok = worst < 0.01 && std::fabs(n22 - 130.0) / 130.0 < 0.02 && n22 > 50.0 &&
                    n22 < 500.0;
    verdict("5 TF solver vs closed form", ok,
            fmt("worst quadrature deviation %.3f%% over mu in [5, 50] nK (limit 1%%); N(22 nK,"
                " 2 pi 300 Hz) = %.1f (expect ~130, order 100)",
                100.0 * worst, n22));
}

// 6. scaling laws: harmonic exponent exactly 5/2, full trap in [2, 3]
void criterion_scaling() {
    begin("6 scaling laws");
    const bs::PhysicalConstants consts;
    const double wbar = 2.0 * bs::kPi * 300.0;
    std::vector<double> mus, ns;
    for (int i = 0; i <= 12; ++i) {
        const double t = 5.0 + 45.0 * i / 12.0;
        mus.push_back(t);
        ns.push_back(bs::harmonic_tf_number(consts.nK_to_joule(t), wbar, consts));
    }
    const double harmonic_slope = loglog_slope(mus, ns);

    const bs::TrapConfig base = bs::TrapConfig::standard();
    std::vector<double> depths, nfull;
    for (double t_nK : {10.0, 16.0, 22.0, 28.0, 34.0, 40.0}) {
        const double depth = base.constants.nK_to_joule(t_nK);
        const bs::TrapConfig cfg =
            bs::trap_detail::with_pair_power(base, bs::Axis::x, bs::power_for_depth(base, depth));
        const bs::MinimumResult min = bs::find_minimum(cfg);
        depths.push_back(t_nK);
        nfull.push_back(bs::atom_number_at(cfg, min, min.energy + depth));
    }
    const double full_slope = loglog_slope(depths, nfull);
    const bool ok = std::fabs(harmonic_slope - 2.5) <= 0.001 && full_slope >= 2.0 &&
                    full_slope <= 3.0;
    verdict("6 scaling laws", ok,
            fmt("harmonic log-log slope %.4f (expect 2.500 +- 0.001); full-trap slope %.3f in"
                " [2.0, 3.0] over [10, 40] nK",
                harmonic_slope, full_slope));
}

// 7. end-to-end pipeline vs the fluctuation model
void criterion_end_to_end() {
    begin("7 end-to-end consistency");
    bs::ExperimentPlan plan;
    plan.detector.calibration_error_rel = 0.0; // isolate the modelled noise terms
    plan.source.model = bs::SourceModel::Deterministic;
    plan.master_seed = 20260808;

    const double sigma_px =
        bs::implied_sigma(plan.trap, bs::NoiseParam::Px, 4.3, bs::full_number_chain());
    plan.noise.sigma(bs::NoiseParam::Px) = sigma_px;

    const double depth60 = bs::depth_for_atom_number(plan.trap, 60.0);
    const double depth450 = bs::depth_for_atom_number(plan.trap, 450.0);
    const double depth650 = bs::depth_for_atom_number(plan.trap, 650.0);

    // 1e4 runs at the 60-atom depth per the stated budget; 2e3 at the
    // bracketing depths
    plan.depths = {depth60};
    plan.runs_per_depth = 10000;
    const bs::ExperimentResult at60 = bs::run_experiment(plan);
    const double normalized60 = at60.per_depth[0].report.normalized;

    plan.depths = {depth450, depth650};
    plan.runs_per_depth = 2000;
    const bs::ExperimentResult bracket = bs::run_experiment(plan);
    const double norm450 = bracket.per_depth[0].report.normalized;
    const double norm650 = bracket.per_depth[1].report.normalized;
    const double mean450 = bracket.per_depth[0].report.mean;
    const double mean650 = bracket.per_depth[1].report.mean;

    const bool ok = normalized60 >= 0.40 && normalized60 <= 0.50 && norm450 < 1.0 &&
                    norm650 > 1.0 && mean450 <= 500.0 && mean650 >= 600.0;
    verdict("7 end-to-end consistency", ok,
            fmt("normalized(N~%.0f) = %.4f in [0.40, 0.50] (model curve value 0.4408);"
                " sub-Poissonian %.4f at N~%.0f, super-Poissonian %.4f at N~%.0f",
                at60.per_depth[0].report.mean, normalized60, norm450, mean450, norm650, mean650));
}

// 8. a Poisson source with everything else quiet is Poissonian
void criterion_poisson_sanity() {
    begin("8 poisson sanity");
    bs::ExperimentPlan plan;
    plan.detector.capture_mean = 0.0;
    plan.detector.calibration_error_rel = 0.0;
    plan.source.model = bs::SourceModel::Poisson;
    plan.master_seed = 31;
    plan.runs_per_depth = 1500;
    const bs::PhysicalConstants& c = plan.trap.constants;
    plan.depths = {c.nK_to_joule(14.0), c.nK_to_joule(22.0)};
    const bs::ExperimentResult result = bs::run_experiment(plan);
    const double tol = 3.0 / std::sqrt(2.0 * plan.runs_per_depth);
    bool ok = true;
    std::string detail;
    for (const bs::DepthResult& d : result.per_depth) {
        ok = ok && std::fabs(d.report.normalized - 1.0) < tol;
        detail += fmt("%s%.4f", detail.empty() ? "normalized = " : ", ", d.report.normalized);
    }
    verdict("8 poisson sanity", ok, detail + fmt(" (expect 1 +- %.4f at every depth)", tol));
}

// 9. chi-square interval coverage
void criterion_ci_coverage() {
    begin("9 CI coverage");
    const int reps = 10000;
    const std::size_t n = 100;
    int covered = 0;
    for (int rep = 0; rep < reps; ++rep) {
        bs::RngStream stream({515, static_cast<std::uint64_t>(rep)});
        bs::Sample s;
        for (std::size_t i = 0; i < n; ++i) s.values.push_back(stream.normal());
        covered += bs::sigma_ci(s.stddev(), n, 0.99).contains(1.0);
    }
    const double coverage = static_cast<double>(covered) / reps;
    verdict("9 CI coverage", coverage >= 0.98 && coverage <= 1.0,
            fmt("99%% interval covered the true sigma in %.2f%% of %d samples (expect 99 +- 1)",
                100.0 * coverage, reps));
}

// 10. exact staircase recovery at the default detector rates
void criterion_step_detection() {
    begin("10 step detection");
    const bs::DetectorSpec spec; // 1e4 counts/s/atom over 2e4, 100 ms bins
    const int trials = 500;
    int exact = 0;
    for (int trial = 0; trial < trials; ++trial) {
        bs::RngStream stream({616, static_cast<std::uint64_t>(trial)});
        bs::AtomSchedule schedule;
        std::vector<int> truth;
        std::vector<std::size_t> boundaries;
        double t = 0.0;
        int level = static_cast<int>(stream.next_u64() % 6);
        for (int seg = 0; seg < 5; ++seg) {
            const std::size_t dwell = 10 + stream.next_u64() % 21;
            schedule.steps.push_back({t, level});
            truth.push_back(level);
            t += static_cast<double>(dwell) * spec.bin_duration;
            boundaries.push_back(static_cast<std::size_t>(std::llround(t / spec.bin_duration)));
            int next;
            do {
                next = static_cast<int>(stream.next_u64() % 6);
            } while (next == level);
            level = next;
        }
        const bs::CountTrace trace =
            bs::simulate_trace(schedule, spec, t, 9000 + static_cast<std::uint64_t>(trial));
        bool ok = true;
        try {
            const auto segments = bs::detect_steps(trace, spec);
            ok = segments.size() == truth.size();
            if (ok) {
                for (std::size_t i = 0; i < truth.size(); ++i) {
                    ok = ok && segments[i].atoms == truth[i];
                    if (i + 1 < truth.size()) {
                        const long long got = static_cast<long long>(segments[i + 1].first_bin);
                        ok = ok && std::llabs(got - static_cast<long long>(boundaries[i])) <= 2;
                    }
                }
            }
        } catch (const bs::AmbiguousLevelError&) {
            ok = false;
        }
        exact += ok;
    }
    verdict("10 step detection", exact >= trials * 95 / 100,
            fmt("%d of %d random staircases recovered exactly (need >= %d)", exact, trials,
                trials * 95 / 100));
}

// 11. the CLI is byte-deterministic across reruns and worker counts
void criterion_determinism(const std::string& cli, const std::string& workdir) {
    begin("11 determinism");
    if (cli.empty()) {
        verdict("11 determinism", false, "no --cli path provided");
        return;
    }
    const fs::path base = fs::path(workdir) / "determinism";
    fs::remove_all(base);
    fs::create_directories(base);

    const std::string plan = R"({
  "depths_nK": [14.0, 22.0],
  "runs_per_depth": 50,
  "master_seed": 99,
  "source_model": "poisson",
  "noise": {"P_x": 0.008, "l_x": 0.004},
  "detector": {"capture_mean_atoms": 5.0, "calibration_error_rel": 0.10}
})";
    bs::write_text_file((base / "plan.json").string(), plan);

    const auto run = [&](const std::string& tag, int threads) -> bool {
        const std::string cmd = cli + " simulate --plan " + (base / "plan.json").string() +
                                " --out " + (base / tag).string() + " --threads " +
                                std::to_string(threads) + " > " + (base / (tag + ".log")).string() +
                                " 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    bool ok = run("w1_a", 1) && run("w1_b", 1) && run("w8_a", 8) && run("w8_b", 8);

    std::vector<std::string> csvs = {"run_records.csv", "fig3a.csv", "fig3b_14.csv",
                                     "fig3b_22.csv"};
    std::string detail = ok ? "CLI runs at widths 1 and 8: " : "CLI invocation failed: ";
    if (ok) {
        for (const std::string& name : csvs) {
            const std::string a = bs::read_text_file((base / "w1_a" / name).string());
            ok = ok && a == bs::read_text_file((base / "w1_b" / name).string()) &&
                 a == bs::read_text_file((base / "w8_a" / name).string()) &&
                 a == bs::read_text_file((base / "w8_b" / name).string());
        }
        detail += ok ? "all CSVs byte-identical" : "CSV mismatch between runs";
    }
    verdict("11 determinism", ok, detail);
}

} // namespace

int main(int argc, char** argv) {
    std::string cli, workdir = fs::temp_directory_path().string();
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli") cli = argv[i + 1];
        if (flag == "--workdir") workdir = argv[i + 1];
    }

    try {
        criterion_quadrature();
        criterion_model_curve();
        criterion_poisson_reference();
        criterion_calibration();
        criterion_tf_solver();
        criterion_scaling();
        criterion_end_to_end();
        criterion_poisson_sanity();
        criterion_ci_coverage();
        criterion_step_detection();
        criterion_determinism(cli, workdir);
    } catch (const std::exception& e) {
        std::printf("[FAIL] acceptance aborted: %s\n", e.what());
        return 1;
    }

    std::printf("%d of 11 criteria passed\n", 11 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
