// bosestats: simulate and analyse a sheet-trap atom-number experiment from
// the command line. Subcommands mirror the library modules: trap geometry,
// Thomas-Fermi numbers, technical-noise propagation, counting-trace
// detection, sample statistics, and the full virtual experiment.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bosestats/bosestats.hpp"

namespace bs = bosestats;
namespace fs = std::filesystem;

namespace {

bs::TrapConfig load_trap(const std::string& path) {
    if (path.empty()) return bs::TrapConfig::standard();
    return bs::trap_from_json(bs::json::parse(bs::read_text_file(path)));
}

void cmd_trap(const std::string& config_path, const std::string& scan_path, bool as_json) {
    const bs::TrapConfig cfg = load_trap(config_path);
    const bs::TrapShape shape = bs::trap_shape(cfg);
    const bs::PhysicalConstants& c = cfg.constants;

    if (as_json) {
        bs::json j{{"minimum_point_um",
                    {bs::m_to_um(shape.minimum_point[0]), bs::m_to_um(shape.minimum_point[1]),
                     bs::m_to_um(shape.minimum_point[2])}},
                   {"minimum_energy_nK", c.joule_to_nK(shape.minimum_energy)},
                   {"barrier_nK",
                    {{"x", c.joule_to_nK(shape.barrier[0])},
                     {"y", c.joule_to_nK(shape.barrier[1])},
                     {"z", c.joule_to_nK(shape.barrier[2])}}},
                   {"frequency_hz",
                    {{"x", bs::radps_to_hz(shape.frequencies.omega[0])},
                     {"y", bs::radps_to_hz(shape.frequencies.omega[1])},
                     {"z", bs::radps_to_hz(shape.frequencies.omega[2])},
                     {"geometric_mean", bs::radps_to_hz(shape.frequencies.mean)}}}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("trap minimum  : (%.4f, %.4f, %.4f) um\n", bs::m_to_um(shape.minimum_point[0]),
                    bs::m_to_um(shape.minimum_point[1]), bs::m_to_um(shape.minimum_point[2]));
        std::printf("minimum energy: %.4f nK\n", c.joule_to_nK(shape.minimum_energy));
        std::printf("%-6s %14s %14s\n", "axis", "barrier_nK", "freq_Hz");
        for (bs::Axis a : {bs::Axis::x, bs::Axis::y, bs::Axis::z}) {
            const int i = bs::axis_index(a);
            std::printf("%-6s %14.4f %14.2f\n", bs::axis_name(a),
                        c.joule_to_nK(shape.barrier[i]),
                        bs::radps_to_hz(shape.frequencies.omega[i]));
        }
        std::printf("geometric mean frequency: %.2f Hz\n", bs::radps_to_hz(shape.frequencies.mean));
    }
    if (!scan_path.empty()) {
        bs::write_text_file(scan_path, bs::trap_scan_csv(cfg));
        std::cerr << "wrote " << scan_path << "\n";
    }
}

void cmd_tf(const std::string& config_path, double lo_nK, double hi_nK, int points,
            const std::string& out_path) {
    const bs::TrapConfig base = load_trap(config_path);
    const bs::PhysicalConstants& c = base.constants;

    std::string csv = "U0_nK,mu_nK,N_full_trap,N_harmonic\n";
    for (int i = 0; i < points; ++i) {
        const double u0_nK = lo_nK + (hi_nK - lo_nK) * i / std::max(1, points - 1);
        const double depth = c.nK_to_joule(u0_nK);
        const bs::TrapConfig cfg =
            bs::trap_detail::with_pair_power(base, bs::Axis::x, bs::power_for_depth(base, depth));
        const bs::MinimumResult min = bs::find_minimum(cfg);
        const double n_full = bs::atom_number_at(cfg, min, min.energy + depth);
        const bs::TrapFrequencies freq = bs::trap_frequencies(cfg);
        const double n_harm = bs::harmonic_tf_number(depth, freq.mean, c);
        csv += bs::csv_row({bs::csv_num(u0_nK), bs::csv_num(u0_nK), bs::csv_num(n_full),
                            bs::csv_num(n_harm)});
    }
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        bs::write_text_file(out_path, csv);
        std::cerr << "wrote " << out_path << "\n";
    }
}

void cmd_noise(const std::string& config_path, const std::string& noise_path, int samples,
               std::uint64_t seed, const std::string& curve_path, double nbg,
               const std::string& invert_spec, int threads) {
    const bs::TrapConfig cfg = load_trap(config_path);

    if (!invert_spec.empty()) {
        // "P_x=2.0,P_y=2.4,...": contributions in percent -> implied stability
        std::printf("%-6s %16s %18s\n", "param", "target_pct", "implied_rel_sigma");
        std::string item;
        std::istringstream in(invert_spec);
        while (std::getline(in, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                throw bs::ValidationError("--invert expects name=percent pairs: " + item);
            }
            const std::string name = item.substr(0, eq);
            const double target = std::stod(item.substr(eq + 1));
            bool found = false;
            for (bs::NoiseParam p : bs::kAllNoiseParams) {
                if (name == bs::noise_param_name(p)) {
                    const double sigma = bs::implied_sigma(cfg, p, target);
                    std::printf("%-6s %16.3f %18.6f\n", name.c_str(), target, sigma);
                    found = true;
                }
            }
            if (!found) throw bs::ValidationError("--invert: unknown parameter " + name);
        }
        return;
    }

    if (noise_path.empty()) {
        throw bs::ValidationError("noise: provide --noise spec.json or --invert targets");
    }
    const bs::NoiseSpec noise = bs::noise_from_json(bs::json::parse(bs::read_text_file(noise_path)));
    const bs::ContributionTable table =
        bs::contribution_table(cfg, noise, samples, seed, bs::full_number_chain(), threads);

    std::printf("%-6s %12s %12s %12s %10s\n", "param", "rel_sigma", "mc_pct", "linear_pct", "degen");
    for (const auto& row : table.rows) {
        std::printf("%-6s %12.5f %12.4f %12.4f %10d\n", bs::noise_param_name(row.param),
                    row.rel_sigma, row.mc_pct, row.linear_pct, row.degenerate);
    }
    std::printf("combined (quadrature): mc %.4f%%  linear %.4f%%\n", table.combined_mc_pct,
                table.combined_linear_pct);

    if (!curve_path.empty()) {
        const bs::FluctModel model{table.combined_mc_pct / 100.0, nbg};
        std::vector<double> grid;
        for (double n = 10.0; n <= 2000.0; n *= 1.1) grid.push_back(n);
        bs::write_text_file(curve_path, bs::model_curve_csv(model, grid));
        std::cerr << "wrote " << curve_path << "\n";
    }
}

void cmd_detect(const std::string& trace_path, const std::string& detector_path, bool simulate,
                double duration, std::uint64_t seed, double load_rate, double loss_rate,
                const std::string& out_path, const std::string& trace_out) {
    bs::DetectorSpec spec;
    if (!detector_path.empty()) {
        spec = bs::detector_from_json(bs::json::parse(bs::read_text_file(detector_path)));
    }

    bs::CountTrace trace;
    if (simulate) {
        // random loading: atoms arrive from the vapor and are lost one by
        // one, producing the staircase the calibration relies on
        bs::AtomSchedule schedule;
        bs::RngStream stream({seed, 0xD1CE});
        int atoms = 0;
        double t = 0.0;
        schedule.steps.push_back({0.0, 0});
        while (t < duration) {
            const double total_rate = load_rate + atoms * loss_rate;
            t += -std::log(stream.uniform01()) / total_rate;
            if (t >= duration) break;
            const bool arrival = stream.uniform01() < load_rate / total_rate;
            atoms += arrival ? 1 : -1;
            if (atoms < 0) atoms = 0;
            schedule.steps.push_back({t, atoms});
        }
        trace = bs::simulate_trace(schedule, spec, duration, seed);
        if (!trace_out.empty()) {
            bs::write_text_file(trace_out, bs::trace_csv(trace));
            std::cerr << "wrote " << trace_out << "\n";
        }
    } else {
        if (trace_path.empty()) {
            throw bs::ValidationError("detect: provide --in trace.csv or --simulate");
        }
        trace = bs::trace_from_csv(bs::read_text_file(trace_path), spec.bin_duration);
    }

    const std::vector<bs::Segment> segments = bs::detect_steps(trace, spec);
    const std::string csv = bs::segments_csv(segments);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        bs::write_text_file(out_path, csv);
        std::cerr << "wrote " << out_path << "\n";
    }
}

void cmd_stats(const std::string& in_path, const std::string& report_path,
               const std::string& hist_path) {
    const bs::Sample sample = bs::sample_from_csv(bs::read_text_file(in_path));
    const bs::FluctReport rep = bs::fluct_report(sample);
    const bs::json j = bs::to_json(rep);
    if (report_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        bs::write_text_file(report_path, j.dump(2) + "\n");
        std::cerr << "wrote " << report_path << "\n";
    }
    if (!hist_path.empty()) {
        bs::write_text_file(hist_path, bs::fig3b_csv(sample));
        std::cerr << "wrote " << hist_path << "\n";
    }
}

void cmd_simulate(const std::string& plan_path, const std::string& out_dir, bool svg,
                  int threads_override) {
    bs::ExperimentPlan plan = bs::plan_from_json(bs::json::parse(bs::read_text_file(plan_path)));
    if (threads_override > 0) plan.threads = threads_override;

    const bs::ExperimentResult result = bs::run_experiment(plan);
    fs::create_directories(out_dir);
    const bs::PhysicalConstants& c = plan.trap.constants;

    bs::write_text_file((fs::path(out_dir) / "run_records.csv").string(),
                        bs::run_records_csv(result, c));
    if (result.per_depth.size() >= 2) {
        bs::write_text_file((fs::path(out_dir) / "fig3a.csv").string(),
                            bs::fig3a_csv(result, plan.model));
    } else {
        std::cerr << "fig3a.csv needs at least two depths; skipped\n";
    }
    for (const bs::DepthResult& d : result.per_depth) {
        const std::string tag = bs::csv_num(c.joule_to_nK(d.target_depth));
        bs::write_text_file((fs::path(out_dir) / ("fig3b_" + tag + ".csv")).string(),
                            bs::fig3b_csv(d.sample));
    }
    bs::write_text_file((fs::path(out_dir) / "report.json").string(),
                        bs::report_json(plan, result).dump(2) + "\n");

    if (svg) {
        std::vector<double> xs, ys, lo, hi, model_ys;
        double x_max = 0.0, y_max = 0.0;
        for (const bs::DepthResult& d : result.per_depth) {
            xs.push_back(d.report.mean);
            ys.push_back(d.report.normalized);
            lo.push_back(d.report.ci68_normalized.lo);
            hi.push_back(d.report.ci68_normalized.hi);
            x_max = std::max(x_max, d.report.mean);
            y_max = std::max({y_max, d.report.ci68_normalized.hi, 1.2});
        }
        bs::SvgPlot plot(0.0, 1.15 * x_max, 0.0, 1.1 * y_max);
        std::vector<double> mx, my;
        for (double n = 2.0; n <= 1.15 * x_max; n *= 1.05) {
            mx.push_back(n);
            my.push_back(bs::model_normalized_fluct(n, plan.model));
        }
        plot.line(mx, my, "gray", true);
        plot.line({0.0, 1.15 * x_max}, {1.0, 1.0}, "black");
        plot.error_bars(xs, lo, hi, "steelblue");
        plot.points(xs, ys, "steelblue");
        bs::write_text_file((fs::path(out_dir) / "fig3a.svg").string(),
                            plot.render("mean atom number", "normalized fluctuation"));

        for (const bs::DepthResult& d : result.per_depth) {
            const bs::HistogramResult h = bs::histogram(d.sample);
            double hy = 1.0;
            for (double v : h.counts) hy = std::max(hy, v);
            for (double v : h.poisson_overlay) hy = std::max(hy, v);
            bs::SvgPlot hist_plot(h.centers.front() - h.bin_width, h.centers.back() + h.bin_width,
                                  0.0, 1.15 * hy);
            hist_plot.bars(h.centers, h.counts, h.bin_width, "steelblue");
            hist_plot.line(h.centers, h.poisson_overlay, "gray", true);
            const bs::GaussianFit fit = bs::gaussian_fit_moments(d.sample);
            if (fit.sigma > 0.0) {
                std::vector<double> gx, gy;
                const double norm = static_cast<double>(h.total) * h.bin_width /
                                    (fit.sigma * std::sqrt(2.0 * bs::kPi));
                for (double x = h.centers.front() - h.bin_width;
                     x <= h.centers.back() + h.bin_width; x += h.bin_width / 8.0) {
                    gx.push_back(x);
                    gy.push_back(norm * std::exp(-(x - fit.mean) * (x - fit.mean) /
                                                 (2.0 * fit.sigma * fit.sigma)));
                }
                hist_plot.line(gx, gy, "firebrick");
            }
            const std::string tag = bs::csv_num(c.joule_to_nK(d.target_depth));
            bs::write_text_file((fs::path(out_dir) / ("fig3b_" + tag + ".svg")).string(),
                                hist_plot.render("measured atom number", "occurrences"));
        }
    }

    for (const bs::DepthResult& d : result.per_depth) {
        std::printf("depth %7.3f nK: mean N %8.2f  normalized %.4f  [%.4f, %.4f]  degenerate %d\n",
                    c.joule_to_nK(d.target_depth), d.report.mean, d.report.normalized,
                    d.report.ci68_normalized.lo, d.report.ci68_normalized.hi, d.degenerate);
    }
    std::cerr << "wrote " << out_dir << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sheet-trap atom statistics laboratory"};
    app.require_subcommand(1);

    std::string config_path, scan_path, noise_path, trace_path, detector_path, in_path;
    std::string out_path, curve_path, invert_spec, plan_path, out_dir, report_path, hist_path;
    std::string trace_out;
    bool as_json = false, simulate_trace_flag = false, svg = false;
    double lo_nK = 5.0, hi_nK = 50.0, duration = 30.0, nbg = 5.0;
    double load_rate = 0.05, loss_rate = 0.02;
    int points = 10, samples = 400, threads = 0;
    std::uint64_t seed = 1;

    CLI::App* trap = app.add_subcommand("trap", "trap minimum, barriers and frequencies");
    trap->add_option("--config", config_path, "trap config JSON (default: built-in)");
    trap->add_option("--scan", scan_path, "write 1-D potential scans CSV");
    trap->add_flag("--json", as_json, "print the shape as JSON");

    CLI::App* tf = app.add_subcommand("tf", "atom number vs trap depth (full trap and harmonic)");
    tf->add_option("--config", config_path, "trap config JSON");
    tf->add_option("--lo", lo_nK, "lowest depth, nK");
    tf->add_option("--hi", hi_nK, "highest depth, nK");
    tf->add_option("--points", points, "grid size");
    tf->add_option("--out", out_path, "output CSV (default: stdout)");

    CLI::App* noise = app.add_subcommand("noise", "propagate technical noise into atom number");
    noise->add_option("--config", config_path, "trap config JSON");
    noise->add_option("--noise", noise_path, "noise spec JSON (relative sigmas)");
    noise->add_option("--samples", samples, "Monte Carlo samples per parameter");
    noise->add_option("--seed", seed, "master seed");
    noise->add_option("--threads", threads, "worker threads");
    noise->add_option("--curve", curve_path, "write the model curve CSV");
    noise->add_option("--nbg", nbg, "background capture mean for the model curve");
    noise->add_option("--invert", invert_spec,
                      "name=percent list: report the implied hardware stability");

    CLI::App* detect = app.add_subcommand("detect", "decode atom levels from a counting trace");
    detect->add_option("--in", trace_path, "trace CSV (bin_index,counts)");
    detect->add_option("--detector", detector_path, "detector spec JSON");
    detect->add_flag("--simulate", simulate_trace_flag, "simulate a random-loading trace instead");
    detect->add_option("--duration", duration, "simulated duration, s");
    detect->add_option("--seed", seed, "simulation seed");
    detect->add_option("--load-rate", load_rate, "arrivals per second");
    detect->add_option("--loss-rate", loss_rate, "loss rate per atom per second");
    detect->add_option("--out", out_path, "segments CSV (default: stdout)");
    detect->add_option("--trace-out", trace_out, "also write the simulated trace CSV");

    CLI::App* stats = app.add_subcommand("stats", "fluctuation report for a sample of counts");
    stats->add_option("--in", in_path, "sample CSV, one value per line")->required();
    stats->add_option("--report", report_path, "write the report JSON (default: stdout)");
    stats->add_option("--hist", hist_path, "write the histogram CSV");

    CLI::App* simulate = app.add_subcommand("simulate", "run the full virtual experiment");
    simulate->add_option("--plan", plan_path, "experiment plan JSON")->required();
    simulate->add_option("--out", out_dir, "output directory")->required();
    simulate->add_flag("--svg", svg, "also render SVG figures");
    simulate->add_option("--threads", threads, "override the plan's worker count");

    try {
        app.parse(argc, argv);
        if (trap->parsed()) cmd_trap(config_path, scan_path, as_json);
        if (tf->parsed()) cmd_tf(config_path, lo_nK, hi_nK, points, out_path);
        if (noise->parsed()) {
            cmd_noise(config_path, noise_path, samples, seed, curve_path, nbg, invert_spec,
                      threads > 0 ? threads : 1);
        }
        if (detect->parsed()) {
            cmd_detect(trace_path, detector_path, simulate_trace_flag, duration, seed, load_rate,
                       loss_rate, out_path, trace_out);
        }
        if (stats->parsed()) cmd_stats(in_path, report_path, hist_path);
        if (simulate->parsed()) cmd_simulate(plan_path, out_dir, svg, threads);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    } catch (const bs::DegenerateRunsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const bs::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const bs::json::exception& e) {
        std::cerr << "error: invalid JSON input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
