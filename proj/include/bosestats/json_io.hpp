#pragma once

#include <string>

#include <json.hpp>

#include "bosestats/detector.hpp"
#include "bosestats/errors.hpp"
#include "bosestats/experiment.hpp"
#include "bosestats/noise.hpp"
#include "bosestats/stats.hpp"
#include "bosestats/trap.hpp"

// JSON documents use presentation units with suffixed key names (nK, um,
// mW, ms); fundamental constants stay SI. All internal values are SI.

namespace bosestats {

using json = nlohmann::json;

namespace json_detail {

inline Axis axis_from_string(const std::string& s) {
    if (s == "x") return Axis::x;
    if (s == "y") return Axis::y;
    if (s == "z") return Axis::z;
    throw ValidationError("axis must be one of x, y, z: got '" + s + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

} // namespace json_detail

inline json to_json(const SheetBeam& s) {
    return json{{"confinement_axis", axis_name(s.confinement_axis)},
                {"wide_axis", axis_name(s.wide_axis)},
                {"center_offset_um", m_to_um(s.center_offset)},
                {"power_mW", w_to_mw(s.power)},
                {"waist_tight_um", m_to_um(s.waist_tight)},
                {"waist_wide_um", m_to_um(s.waist_wide)}};
}

inline SheetBeam sheet_from_json(const json& j) {
    SheetBeam s;
    s.confinement_axis = json_detail::axis_from_string(j.at("confinement_axis").get<std::string>());
    s.wide_axis = json_detail::axis_from_string(j.at("wide_axis").get<std::string>());
    s.center_offset = um_to_m(j.at("center_offset_um").get<double>());
    s.power = mw_to_w(j.at("power_mW").get<double>());
    s.waist_tight = um_to_m(j.at("waist_tight_um").get<double>());
    s.waist_wide = um_to_m(j.at("waist_wide_um").get<double>());
    s.validate();
    return s;
}

inline json to_json(const PhysicalConstants& c) {
    return json{{"atom_mass_kg", c.atom_mass},
                {"gravity_m_per_s2", c.gravity_accel},
                {"boltzmann_J_per_K", c.boltzmann},
                {"hbar_J_s", c.hbar},
                {"scattering_length_m", c.scattering_length}};
}

inline PhysicalConstants constants_from_json(const json& j) {
    PhysicalConstants defaults;
    PhysicalConstants c;
    c.atom_mass = json_detail::get_or(j, "atom_mass_kg", defaults.atom_mass);
    c.gravity_accel = json_detail::get_or(j, "gravity_m_per_s2", defaults.gravity_accel);
    c.boltzmann = json_detail::get_or(j, "boltzmann_J_per_K", defaults.boltzmann);
    c.hbar = json_detail::get_or(j, "hbar_J_s", defaults.hbar);
    c.scattering_length = json_detail::get_or(j, "scattering_length_m", defaults.scattering_length);
    c.validate();
    return c;
}

inline json to_json(const SearchRegion& r) {
    return json{{"x_half_um", m_to_um(r.x_half)}, {"y_half_um", m_to_um(r.y_half)},
                {"z_lo_um", m_to_um(r.z_lo)},     {"z_hi_um", m_to_um(r.z_hi)},
                {"scan_step_um", m_to_um(r.scan_step)}};
}

inline SearchRegion region_from_json(const json& j) {
    SearchRegion defaults;
    SearchRegion r;
    r.x_half = um_to_m(json_detail::get_or(j, "x_half_um", m_to_um(defaults.x_half)));
    r.y_half = um_to_m(json_detail::get_or(j, "y_half_um", m_to_um(defaults.y_half)));
    r.z_lo = um_to_m(json_detail::get_or(j, "z_lo_um", m_to_um(defaults.z_lo)));
    r.z_hi = um_to_m(json_detail::get_or(j, "z_hi_um", m_to_um(defaults.z_hi)));
    r.scan_step = um_to_m(json_detail::get_or(j, "scan_step_um", m_to_um(defaults.scan_step)));
    r.validate();
    return r;
}

inline json to_json(const TrapConfig& cfg) {
    json sheets = json::array();
    for (const auto& s : cfg.sheets) sheets.push_back(to_json(s));
    return json{{"sheets", sheets},
                {"alpha", cfg.alpha},
                {"gravity_enabled", cfg.gravity_enabled},
                {"constants", to_json(cfg.constants)},
                {"search", to_json(cfg.region)}};
}

inline TrapConfig trap_from_json(const json& j) {
    TrapConfig cfg;
    cfg.sheets.clear();
    for (const auto& js : j.at("sheets")) cfg.sheets.push_back(sheet_from_json(js));
    cfg.alpha = j.at("alpha").get<double>();
    cfg.gravity_enabled = j.at("gravity_enabled").get<bool>();
    cfg.constants = j.contains("constants") ? constants_from_json(j.at("constants"))
                                            : PhysicalConstants{};
    cfg.region = j.contains("search") ? region_from_json(j.at("search")) : SearchRegion{};
    cfg.validate();
    return cfg;
}

inline json to_json(const NoiseSpec& n) {
    json j;
    for (NoiseParam p : kAllNoiseParams) j[noise_param_name(p)] = n.sigma(p);
    j["truncation_sigma"] = n.truncation;
    return j;
}

inline NoiseSpec noise_from_json(const json& j) {
    NoiseSpec n;
    for (NoiseParam p : kAllNoiseParams) {
        n.sigma(p) = json_detail::get_or(j, noise_param_name(p), 0.0);
    }
    n.truncation = json_detail::get_or(j, "truncation_sigma", 5.0);
    n.validate();
    return n;
}

inline json to_json(const DetectorSpec& d) {
    return json{{"rate_per_atom_per_s", d.rate_per_atom},
                {"background_rate_per_s", d.background_rate},
                {"bin_duration_ms", s_to_ms(d.bin_duration)},
                {"capture_mean_atoms", d.capture_mean},
                {"calibration_error_rel", d.calibration_error_rel},
                {"window_bins", d.window_bins},
                {"threshold_sigma", d.threshold_sigma},
                {"ambiguity_atoms", d.ambiguity_atoms}};
}

inline DetectorSpec detector_from_json(const json& j) {
    DetectorSpec defaults;
    DetectorSpec d;
    d.rate_per_atom = json_detail::get_or(j, "rate_per_atom_per_s", defaults.rate_per_atom);
    d.background_rate = json_detail::get_or(j, "background_rate_per_s", defaults.background_rate);
    d.bin_duration = ms_to_s(json_detail::get_or(j, "bin_duration_ms", s_to_ms(defaults.bin_duration)));
    d.capture_mean = json_detail::get_or(j, "capture_mean_atoms", defaults.capture_mean);
    d.calibration_error_rel =
        json_detail::get_or(j, "calibration_error_rel", defaults.calibration_error_rel);
    d.window_bins = json_detail::get_or(j, "window_bins", defaults.window_bins);
    d.threshold_sigma = json_detail::get_or(j, "threshold_sigma", defaults.threshold_sigma);
    d.ambiguity_atoms = json_detail::get_or(j, "ambiguity_atoms", defaults.ambiguity_atoms);
    d.validate();
    return d;
}

inline json to_json(const FluctModel& m) {
    return json{{"delta_tech", m.delta_tech}, {"background_mean_atoms", m.background_mean}};
}

inline FluctModel fluct_model_from_json(const json& j) {
    FluctModel defaults;
    FluctModel m;
    m.delta_tech = json_detail::get_or(j, "delta_tech", defaults.delta_tech);
    m.background_mean = json_detail::get_or(j, "background_mean_atoms", defaults.background_mean);
    m.validate();
    return m;
}

inline json to_json(const RampSchedule& r, const PhysicalConstants& c) {
    return json{{"start_depth_nK", c.joule_to_nK(r.start_depth)},
                {"end_depth_nK", c.joule_to_nK(r.end_depth)},
                {"duration_ms", s_to_ms(r.duration)},
                {"tau_ms", s_to_ms(r.tau)}};
}

inline RampSchedule ramp_from_json(const json& j, const PhysicalConstants& c) {
    RampSchedule r;
    r.start_depth = c.nK_to_joule(j.at("start_depth_nK").get<double>());
    r.end_depth = c.nK_to_joule(j.at("end_depth_nK").get<double>());
    r.duration = ms_to_s(json_detail::get_or(j, "duration_ms", 1500.0));
    r.tau = ms_to_s(json_detail::get_or(j, "tau_ms", 500.0));
    r.validate();
    return r;
}

inline json to_json(const ExperimentPlan& p) {
    json j{{"trap", to_json(p.trap)},
           {"noise", to_json(p.noise)},
           {"detector", to_json(p.detector)},
           {"model", to_json(p.model)},
           {"runs_per_depth", p.runs_per_depth},
           {"master_seed", p.master_seed},
           {"threads", p.threads}};
    json depths = json::array();
    for (double d : p.depths) depths.push_back(p.trap.constants.joule_to_nK(d));
    j["depths_nK"] = depths;
    switch (p.source.model) {
        case SourceModel::Deterministic: j["source_model"] = "deterministic"; break;
        case SourceModel::Poisson: j["source_model"] = "poisson"; break;
        default:
            j["source_model"] = json{{"variance_ratio", p.source.variance_ratio}};
    }
    if (p.ramp) j["ramp"] = to_json(*p.ramp, p.trap.constants);
    return j;
}

inline ExperimentPlan plan_from_json(const json& j) {
    ExperimentPlan p;
    p.trap = j.contains("trap") ? trap_from_json(j.at("trap")) : TrapConfig::standard();
    if (j.contains("noise")) p.noise = noise_from_json(j.at("noise"));
    if (j.contains("detector")) p.detector = detector_from_json(j.at("detector"));
    if (j.contains("model")) p.model = fluct_model_from_json(j.at("model"));
    p.depths.clear();
    for (const auto& d : j.at("depths_nK")) {
        p.depths.push_back(p.trap.constants.nK_to_joule(d.get<double>()));
    }
    p.runs_per_depth = j.at("runs_per_depth").get<int>();
    p.master_seed = json_detail::get_or<std::uint64_t>(j, "master_seed", 1);
    p.threads = json_detail::get_or(j, "threads", 1);
    if (j.contains("source_model")) {
        const auto& s = j.at("source_model");
        if (s.is_string()) {
            const std::string name = s.get<std::string>();
            if (name == "deterministic") {
                p.source.model = SourceModel::Deterministic;
            } else if (name == "poisson") {
                p.source.model = SourceModel::Poisson;
            } else {
                throw ValidationError("plan: unknown source model '" + name + "'");
            }
        } else {
            p.source.model = SourceModel::CustomVariance;
            p.source.variance_ratio = s.at("variance_ratio").get<double>();
        }
    }
    if (j.contains("ramp")) p.ramp = ramp_from_json(j.at("ramp"), p.trap.constants);
    p.validate();
    return p;
}

inline json to_json(const FluctReport& rep) {
    return json{{"n", rep.n},
                {"mean", rep.mean},
                {"sigma", rep.sigma},
                {"relative", rep.relative},
                {"normalized", rep.normalized},
                {"ci68_normalized", {rep.ci68_normalized.lo, rep.ci68_normalized.hi}},
                {"ci99_relative", {rep.ci99_relative.lo, rep.ci99_relative.hi}},
                {"poisson_reference",
                 {{"value", rep.poisson_ref.value},
                  {"band_linear", rep.poisson_ref.band_linear},
                  {"band_exact", {rep.poisson_ref.exact_band.lo, rep.poisson_ref.exact_band.hi}}}},
                {"degenerate_sample", rep.degenerate}};
}

inline json report_json(const ExperimentPlan& plan, const ExperimentResult& result) {
    json depths = json::array();
    for (const DepthResult& d : result.per_depth) {
        depths.push_back(json{{"target_depth_nK", plan.trap.constants.joule_to_nK(d.target_depth)},
                              {"nominal_power_mW", w_to_mw(d.nominal_power)},
                              {"mean_true_n", d.mean_true_n},
                              {"degenerate_runs", d.degenerate},
                              {"fluctuation", to_json(d.report)}});
    }
    return json{{"plan", to_json(plan)},
                {"calibration_scale_error", result.epoch_scale_error},
                {"depths", depths}};
}

} // namespace bosestats
