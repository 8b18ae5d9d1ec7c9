// Command-line front end: simulation, bias sweeps, signal/decoy waveform
// comparison, raw KS testing, waveform feature extraction and decoy-state
// key-rate reports. CSV for series data, JSON for scalar reports.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gainswitch/gainswitch.hpp"

namespace gs = gainswitch;
using nlohmann::json;

namespace {

struct SimOptions {
    std::string params_path;
    std::string drive_path;
    std::string bias = "13mA";
    std::string peak = "6A";
    std::string width = "2ps";
    std::string pulse_at = "5ns";
    std::string filter_tau;
    std::string dt = "5fs";
    std::string t_end = "10ns";
    std::string analyze_from;
    std::string drive_edge;
    double prominence = 0.02;
    long stride = 0; // 0 -> choose automatically
    std::string out_dir = ".";
    bool use_rk4 = false;
};

gs::LaserParams load_params_opt(const std::string& path) {
    if (!path.empty())
        return gs::load_params_file(path);
    if (const char* env = std::getenv("GSIM_PARAMS"); env && *env)
        return gs::load_params_file(env);
    return gs::default_params();
}

struct DriveSetup {
    gs::DriveProfile profile;
    std::optional<double> edge;         // drive edge for delay reporting
    double analyze_from = 0.0;          // feature window start
};

DriveSetup build_drive(const SimOptions& o) {
    DriveSetup setup;
    const double t_end = gs::parse_time(o.t_end);
    if (!o.drive_path.empty()) {
        setup.profile = gs::load_drive_file(o.drive_path);
        if (!o.drive_edge.empty())
            setup.edge = gs::parse_time(o.drive_edge);
    } else {
        const double bias = gs::parse_current(o.bias);
        const double peak = gs::parse_current(o.peak);
        const double width = gs::parse_time(o.width);
        const double at = gs::parse_time(o.pulse_at);
        setup.profile = gs::gain_switch_profile(bias, peak, at, width, t_end);
        setup.edge = at;
        setup.analyze_from = std::max(0.0, at - 2e-9);
    }
    if (!o.filter_tau.empty())
        setup.profile = gs::apply_filter(setup.profile, gs::parse_time(o.filter_tau));
    if (!o.analyze_from.empty())
        setup.analyze_from = gs::parse_time(o.analyze_from);
    return setup;
}

json peak_json(const gs::Peak& p) {
    return json{{"t_s", p.t}, {"amplitude", p.amplitude}, {"prominence", p.prominence}};
}

json features_json(const gs::PulseFeatures& f, double prominence_floor, bool normalized) {
    json j;
    j["primary"] = peak_json(f.primary);
    j["secondary"] = f.secondary ? peak_json(*f.secondary) : json(nullptr);
    j["peak_difference"] = f.peak_difference;
    j["turn_on_delay_s"] = f.turn_on_delay ? json(*f.turn_on_delay) : json(nullptr);
    j["prominence_floor"] = prominence_floor;
    j["normalized"] = normalized;
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw gs::config_error("cannot write output file: " + path);
    out << content;
}

long auto_stride(double dt, double t_end, long cap = 200000) {
    const long steps = std::lround(t_end / dt);
    return std::max<long>(1, steps / cap);
}

int run_simulate(const SimOptions& o) {
    const auto params = load_params_opt(o.params_path);
    const auto setup = build_drive(o);
    const double dt = gs::parse_time(o.dt);
    const double t_end = gs::parse_time(o.t_end);
    const long stride = o.stride > 0 ? o.stride : auto_stride(dt, t_end);

    const gs::SimTrace trace =
        o.use_rk4 ? gs::simulate_rk4(params, setup.profile, dt, t_end, {}, stride)
                  : gs::simulate(params, setup.profile, dt, t_end, {}, stride);

    std::filesystem::create_directories(o.out_dir);
    gs::write_trace_csv_file(trace, o.out_dir + "/trace.csv");

    const auto window = gs::photon_waveform(trace, setup.analyze_from, t_end);
    const auto normalized = gs::normalize_amplitude(window);
    const auto features = gs::pulse_features(normalized, setup.edge, o.prominence);

    json j = features_json(features, o.prominence, true);
    j["i_threshold_A"] = trace.params.i_threshold;
    j["clamp_events"] = trace.clamp_events;
    j["analyze_from_s"] = setup.analyze_from;
    j["integrator"] = o.use_rk4 ? "rk4" : "euler";

    // closed-form operating point at the pre-pulse bias level
    const double bias_level = setup.profile.current_at(0.0);
    const double n_s_steady = gs::steady_photon_density(trace.params, bias_level);
    const auto ss = gs::small_signal(trace.params, n_s_steady);
    j["small_signal"] = json{{"i_th", trace.params.i_threshold},
                             {"bias_A", bias_level},
                             {"n_s_steady", n_s_steady},
                             {"omega_rad_s", ss.omega ? json(*ss.omega) : json(nullptr)},
                             {"damping_1_s", ss.damping},
                             {"overdamped", ss.overdamped()}};
    const std::string text = j.dump(2) + "\n";
    write_text_file(o.out_dir + "/features.json", text);
    std::cout << text;
    return 0;
}

struct SweepRow {
    double bias = 0.0;
    std::optional<gs::PulseFeatures> features;
    std::string error;
};

int run_sweep(const SimOptions& o, const std::vector<std::string>& bias_list,
              int workers) {
    const auto params = load_params_opt(o.params_path);
    const double dt = gs::parse_time(o.dt);
    const double t_end = gs::parse_time(o.t_end);
    const double peak = gs::parse_current(o.peak);
    const double width = gs::parse_time(o.width);
    const double at = gs::parse_time(o.pulse_at);
    const double analyze_from =
        o.analyze_from.empty() ? std::max(0.0, at - 2e-9) : gs::parse_time(o.analyze_from);
    const long stride = o.stride > 0 ? o.stride : 40;

    std::vector<double> biases;
    for (const auto& b : bias_list) biases.push_back(gs::parse_current(b));
    std::sort(biases.begin(), biases.end());
    if (biases.empty())
        throw gs::config_error("sweep needs at least one bias value");

    std::vector<SweepRow> rows(biases.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = cursor.fetch_add(1);
            if (k >= biases.size()) return;
            SweepRow& row = rows[k];
            row.bias = biases[k];
            try {
                gs::DriveProfile drive =
                    gs::gain_switch_profile(biases[k], peak, at, width, t_end);
                if (!o.filter_tau.empty())
                    drive = gs::apply_filter(drive, gs::parse_time(o.filter_tau));
                const auto trace = gs::simulate(params, drive, dt, t_end, {}, stride);
                const auto w = gs::normalize_amplitude(
                    gs::photon_waveform(trace, analyze_from, t_end));
                row.features = gs::pulse_features(w, at, o.prominence);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::ostringstream csv;
    csv << "bias_A,secondary_amplitude,peak_difference,turn_on_delay_s,error\n";
    char buf[220];
    for (const auto& row : rows) {
        if (row.features) {
            const auto& f = *row.features;
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,\n", row.bias,
                          f.secondary ? f.secondary->amplitude : 0.0, f.peak_difference,
                          f.turn_on_delay ? *f.turn_on_delay : 0.0);
            csv << buf;
        } else {
            std::string reason = row.error;
            std::replace(reason.begin(), reason.end(), ',', ';');
            std::replace(reason.begin(), reason.end(), '\n', ' ');
            std::snprintf(buf, sizeof buf, "%.17g,,,,", row.bias);
            csv << buf << reason << "\n";
        }
    }
    std::filesystem::create_directories(o.out_dir);
    write_text_file(o.out_dir + "/sweep.csv", csv.str());
    std::cout << csv.str();
    return 0;
}

const char* method_name(gs::KsMethod m) {
    return m == gs::KsMethod::kExact ? "exact" : "asymptotic";
}

gs::KsMethod parse_method(const std::string& name) {
    if (name == "auto") return gs::KsMethod::kAuto;
    if (name == "exact") return gs::KsMethod::kExact;
    if (name == "asymptotic") return gs::KsMethod::kAsymptotic;
    throw gs::config_error("unknown method '" + name + "' (auto|exact|asymptotic)");
}

json ks_json(const gs::KsResult& r, double alpha) {
    json j;
    j["d_statistic"] = r.d;
    j["p_value"] = r.p_value;
    j["n"] = r.n;
    j["m"] = r.m;
    j["method"] = method_name(r.method);
    j["tie_warning"] = r.tie_warning;
    j["alpha"] = alpha;
    j["verdict"] = r.p_value > alpha ? "indistinguishable" : "distinguishable";
    return j;
}

// Crop a record to a window of the given duration around its tallest
// sample (a quarter ahead of the peak, three quarters behind).
gs::Waveform window_around_peak(const gs::Waveform& w, double duration) {
    const std::size_t peak =
        std::size_t(std::max_element(w.v.begin(), w.v.end()) - w.v.begin());
    return gs::crop(w, w.t[peak] - 0.25 * duration, w.t[peak] + 0.75 * duration);
}

int run_compare(const std::string& signal_path, const std::string& decoy_path,
                std::size_t n_points, double alpha, const std::string& method,
                const std::string& window, const std::string& out_dir) {
    gs::Waveform signal = gs::read_waveform_file(signal_path);
    gs::Waveform decoy = gs::read_waveform_file(decoy_path);
    if (!window.empty()) {
        const double duration = gs::parse_time(window);
        signal = window_around_peak(signal, duration);
        decoy = window_around_peak(decoy, duration);
    }
    const auto cmp = gs::compare_waveforms(signal, decoy, n_points, parse_method(method));

    const json j = ks_json(cmp.ks, alpha);
    const std::string text = j.dump(2) + "\n";
    std::cout << text;

    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/compare.json", text);

    std::ostringstream csv;
    csv << "amplitude,signal_cdf,decoy_cdf\n";
    std::vector<double> grid;
    grid.insert(grid.end(), cmp.ecdf_a.values.begin(), cmp.ecdf_a.values.end());
    grid.insert(grid.end(), cmp.ecdf_b.values.begin(), cmp.ecdf_b.values.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    char buf[160];
    for (const double x : grid) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x, cmp.ecdf_a(x), cmp.ecdf_b(x));
        csv << buf;
    }
    write_text_file(out_dir + "/ecdf.csv", csv.str());
    return 0;
}

int run_ks_test(const std::string& a_path, const std::string& b_path,
                const std::string& method, double alpha) {
    const auto a = gs::read_waveform_file(a_path);
    const auto b = gs::read_waveform_file(b_path);
    const auto r = gs::ks_test(a.v, b.v, parse_method(method));
    std::cout << ks_json(r, alpha).dump(2) << "\n";
    return 0;
}

int run_analyze(const std::string& path, double prominence, const std::string& drive_edge,
                bool normalize) {
    auto w = gs::read_waveform_file(path);
    if (normalize)
        w = gs::normalize_amplitude(w);
    std::optional<double> edge;
    if (!drive_edge.empty())
        edge = gs::parse_time(drive_edge);
    const auto features = gs::pulse_features(w, edge, prominence);
    std::cout << features_json(features, prominence, normalize).dump(2) << "\n";
    return 0;
}

json keyrate_json(const gs::KeyRateReport& r, const gs::DecoyLink& link) {
    json j;
    j["q_mu"] = r.q_mu;
    j["e_mu"] = r.e_mu;
    j["q_mu_decoy"] = r.q_mu_decoy;
    j["e_mu_decoy"] = r.e_mu_decoy;
    j["y_1"] = r.y_1;
    j["q_1"] = r.q_1;
    j["e_1"] = r.e_1;
    j["h2_e_mu"] = r.h2_e_mu;
    j["h2_e_1"] = r.h2_e_1;
    j["correction_loss"] = r.correction_loss;
    j["privacy_gain"] = r.privacy_gain;
    j["secure_rate"] = r.secure_rate;
    j["insecure"] = r.insecure;
    j["warnings"] = r.warnings;
    j["mu_signal"] = link.mu_signal;
    j["mu_decoy"] = link.mu_decoy;
    j["error_model"] =
        link.error_model == gs::ErrorModel::kFlatDark ? "flat-dark" : "standard";
    return j;
}

double parse_plain_number(const std::string& text, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        throw gs::config_error(std::string("cannot parse ") + what + " value '" + text + "'");
    return v;
}

int run_keyrate(gs::DecoyLink link, const std::vector<std::string>& sweep_mu,
                const std::vector<std::string>& sweep_eta, const std::string& out_dir) {
    const auto report = gs::key_rate(link);
    std::cout << keyrate_json(report, link).dump(2) << "\n";

    if (!sweep_mu.empty() || !sweep_eta.empty()) {
        std::ostringstream csv;
        csv << "mu_signal,eta,secure_rate,q_mu,e_mu,insecure\n";
        char buf[220];
        auto emit = [&](const gs::DecoyLink& l) {
            const auto r = gs::key_rate(l);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                          l.mu_signal, l.eta, r.secure_rate, r.q_mu, r.e_mu,
                          r.insecure ? 1 : 0);
            csv << buf;
        };
        if (!sweep_mu.empty()) {
            std::vector<double> mus;
            for (const auto& m : sweep_mu) mus.push_back(parse_plain_number(m, "mu"));
            std::sort(mus.begin(), mus.end());
            for (const double mu : mus) {
                gs::DecoyLink l = link;
                l.mu_signal = mu;
                emit(l);
            }
        }
        if (!sweep_eta.empty()) {
            std::vector<double> etas;
            for (const auto& e : sweep_eta) etas.push_back(parse_plain_number(e, "eta"));
            std::sort(etas.begin(), etas.end());
            for (const double eta : etas) {
                gs::DecoyLink l = link;
                l.eta = eta;
                emit(l);
            }
        }
        std::filesystem::create_directories(out_dir);
        write_text_file(out_dir + "/keyrate_sweep.csv", csv.str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gain-switched laser-diode simulator and signal/decoy "
                 "indistinguishability toolkit"};
    app.require_subcommand(1);
    int rc = 0;

    // ---- simulate ----
    SimOptions sim;
    auto* simulate = app.add_subcommand("simulate",
        "Integrate the rate equations and report pulse features");
    simulate->add_option("--params", sim.params_path, "Laser parameter file");
    simulate->add_option("--drive", sim.drive_path, "Drive profile file");
    simulate->add_option("--bias", sim.bias, "Pre-bias current (e.g. 13mA)");
    simulate->add_option("--peak", sim.peak, "Perturbation peak current");
    simulate->add_option("--width", sim.width, "Perturbation width");
    simulate->add_option("--pulse-at", sim.pulse_at, "Perturbation start time");
    simulate->add_option("--filter-tau", sim.filter_tau, "Driver low-pass time constant");
    simulate->add_option("--dt", sim.dt, "Integration step");
    simulate->add_option("--t-end", sim.t_end, "Simulation end time");
    simulate->add_option("--stride", sim.stride, "Record every k-th step (0 = auto)");
    simulate->add_option("--analyze-from", sim.analyze_from, "Feature window start");
    simulate->add_option("--drive-edge", sim.drive_edge,
                         "Drive edge time for delay reporting (file drives)");
    simulate->add_option("--prominence", sim.prominence, "Peak prominence floor");
    simulate->add_option("--out-dir", sim.out_dir, "Output directory");
    simulate->add_flag("--rk4", sim.use_rk4, "Integrate with RK4 instead of Euler");
    simulate->callback([&]() { rc = run_simulate(sim); });

    // ---- sweep ----
    SimOptions swp;
    std::vector<std::string> bias_list;
    int workers = 1;
    auto* sweep = app.add_subcommand("sweep",
        "Simulate a pre-bias grid and tabulate secondary-peak features");
    sweep->add_option("--params", swp.params_path, "Laser parameter file");
    sweep->add_option("--bias-list", bias_list, "Comma-separated bias values")
        ->delimiter(',')->required();
    sweep->add_option("--peak", swp.peak, "Perturbation peak current");
    sweep->add_option("--width", swp.width, "Perturbation width");
    sweep->add_option("--pulse-at", swp.pulse_at, "Perturbation start time");
    sweep->add_option("--filter-tau", swp.filter_tau, "Driver low-pass time constant");
    sweep->add_option("--dt", swp.dt, "Integration step");
    sweep->add_option("--t-end", swp.t_end, "Simulation end time");
    sweep->add_option("--stride", swp.stride, "Record every k-th step (0 = auto)");
    sweep->add_option("--analyze-from", swp.analyze_from, "Feature window start");
    sweep->add_option("--prominence", swp.prominence, "Peak prominence floor");
    sweep->add_option("--out-dir", swp.out_dir, "Output directory");
    sweep->add_option("--workers", workers, "Parallel simulations");
    sweep->callback([&]() { rc = run_sweep(swp, bias_list, workers); });

    // ---- compare ----
    std::string cmp_signal, cmp_decoy, cmp_method = "auto", cmp_out = ".", cmp_window;
    std::size_t cmp_points = 201;
    double cmp_alpha = 0.05;
    auto* compare = app.add_subcommand("compare",
        "Signal/decoy comparison pipeline: normalize, align, resample, KS test");
    compare->add_option("signal", cmp_signal, "Signal waveform or trace CSV")->required();
    compare->add_option("decoy", cmp_decoy, "Decoy waveform or trace CSV")->required();
    compare->add_option("--n-points", cmp_points, "Comparison record length");
    compare->add_option("--alpha", cmp_alpha, "Acceptance threshold on p");
    compare->add_option("--method", cmp_method, "auto|exact|asymptotic");
    compare->add_option("--window", cmp_window,
                        "Crop each record to this duration around its peak");
    compare->add_option("--out-dir", cmp_out, "Output directory");
    compare->callback([&]() {
        rc = run_compare(cmp_signal, cmp_decoy, cmp_points, cmp_alpha, cmp_method,
                         cmp_window, cmp_out);
    });

    // ---- ks-test ----
    std::string ks_a, ks_b, ks_method = "auto";
    double ks_alpha = 0.05;
    auto* kstest = app.add_subcommand("ks-test",
        "Two-sample KS test on the raw value columns of two CSVs");
    kstest->add_option("a", ks_a, "First waveform CSV")->required();
    kstest->add_option("b", ks_b, "Second waveform CSV")->required();
    kstest->add_option("--method", ks_method, "auto|exact|asymptotic");
    kstest->add_option("--alpha", ks_alpha, "Acceptance threshold on p");
    kstest->callback([&]() { rc = run_ks_test(ks_a, ks_b, ks_method, ks_alpha); });

    // ---- analyze ----
    std::string an_path, an_edge;
    double an_prominence = 0.02;
    bool an_normalize = false;
    auto* analyze = app.add_subcommand("analyze",
        "Peak/feature report for an ingested waveform CSV");
    analyze->add_option("waveform", an_path, "Waveform CSV")->required();
    analyze->add_option("--prominence", an_prominence, "Peak prominence floor");
    analyze->add_option("--drive-edge", an_edge, "Drive edge time for delay reporting");
    analyze->add_flag("--normalize", an_normalize, "Amplitude-normalize first");
    analyze->callback([&]() { rc = run_analyze(an_path, an_prominence, an_edge, an_normalize); });

    // ---- keyrate ----
    gs::DecoyLink link;
    std::string link_path, kr_out = ".";
    bool standard_model = false;
    std::vector<std::string> sweep_mu, sweep_eta;
    auto* keyrate = app.add_subcommand("keyrate",
        "Decoy-state key-rate report for a weak-coherent-pulse link");
    keyrate->add_option("--link", link_path, "Link parameter file");
    keyrate->add_option("--mu-signal", link.mu_signal, "Signal mean photon number");
    keyrate->add_option("--mu-decoy", link.mu_decoy, "Decoy mean photon number");
    keyrate->add_option("--y0", link.y0, "Dark-count yield");
    keyrate->add_option("--eta", link.eta, "Transmission/detection probability");
    keyrate->add_option("--e-detector", link.e_detector, "Detector error parameter");
    keyrate->add_option("--e-darkcount", link.e_darkcount, "Dark-count error yield");
    keyrate->add_option("--q-ratio", link.q_ratio, "Basis-sift ratio");
    keyrate->add_option("--f-ec", link.f_ec, "Error-correction inefficiency");
    keyrate->add_option("--cutoff", link.photon_cutoff, "Poisson truncation order");
    keyrate->add_flag("--standard-error-model", standard_model,
                      "Use the conventional per-photon error model");
    keyrate->add_option("--sweep-mu", sweep_mu, "Report a CSV sweep over mu")->delimiter(',');
    keyrate->add_option("--sweep-eta", sweep_eta, "Report a CSV sweep over eta")->delimiter(',');
    keyrate->add_option("--out-dir", kr_out, "Output directory");
    keyrate->callback([&]() {
        gs::DecoyLink l = link_path.empty() ? link : gs::load_link_file(link_path);
        l.error_model = standard_model ? gs::ErrorModel::kStandard : gs::ErrorModel::kFlatDark;
        rc = run_keyrate(l, sweep_mu, sweep_eta, kr_out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const gs::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const gs::numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 3;
    }
    return rc;
}
