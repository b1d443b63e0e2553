/*
 * cli.hpp: run configuration, command dispatch and output emission for the
 * kerrpo command-line tool. Kept in the library so that every command can be
 * driven from tests without spawning a process.
 *
 * Precedence of settings: command-line flags, then --config (JSON), then
 * defaults. Exit codes follow kerrpo::ExitCode.
 */

#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kerrpo/errors.hpp"
#include "kerrpo/io.hpp"
#include "kerrpo/model.hpp"
#include "kerrpo/oracle.hpp"
#include "kerrpo/parallel.hpp"
#include "kerrpo/state_analysis.hpp"
#include "kerrpo/wei_norman.hpp"

namespace kerrpo::cli {

enum class Mode { coeffs, pk, autocorr, oracle, compare, revivals, fig1, fig2, fig3 };
enum class Format { csv, json };

inline constexpr std::array<std::pair<const char*, Mode>, 9> kModes{{
    {"coeffs", Mode::coeffs},
    {"pk", Mode::pk},
    {"autocorr", Mode::autocorr},
    {"oracle", Mode::oracle},
    {"compare", Mode::compare},
    {"revivals", Mode::revivals},
    {"fig1", Mode::fig1},
    {"fig2", Mode::fig2},
    {"fig3", Mode::fig3},
}};

inline std::string mode_name(Mode m) {
    for (const auto& [name, mode] : kModes)
        if (mode == m) return name;
    return "?";
}

struct Tolerances {
    double ode_tol = 1e-10;
    double series_tol = 1e-14;
    double conv_tol = 1e-6;
};

struct RunConfig {
    ModelParams params;
    double t_max = 8.0 * kPi;
    double sample_dt = 8.0 * kPi / 2000.0;
    Tolerances tol;
    std::size_t nmax_cap = 4096;
    double compare_tol = 0.05;
    double revival_threshold = 0.5;
    std::string out;  // empty: standard output
    Format format = Format::csv;
    Mode mode = Mode::autocorr;

    void validate() const {
        params.validate();
        if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidParameter("--t-max must be positive");
        if (!(sample_dt > 0.0) || !std::isfinite(sample_dt)) throw InvalidParameter("--dt must be positive");
        if (!(tol.ode_tol > 0.0)) throw InvalidParameter("--ode-tol must be positive");
        if (!(tol.series_tol > 0.0)) throw InvalidParameter("--series-tol must be positive");
        if (!(tol.conv_tol > 0.0)) throw InvalidParameter("--conv-tol must be positive");
        if (nmax_cap < 3) throw InvalidParameter("--nmax-cap must be at least 3");
        if (!(compare_tol > 0.0)) throw InvalidParameter("compare tolerance must be positive");
        if (!(revival_threshold > 0.0 && revival_threshold < 1.0))
            throw InvalidParameter("--threshold must lie in (0, 1)");
    }
};

// Usage problems; message carries the help text.
class UsageError : public InvalidParameter {
public:
    using InvalidParameter::InvalidParameter;
};

// Thrown by parse_config for --help.
struct HelpRequested {
    std::string text;
};

// "a+bi", "a-bi", "a", "bi", "i", "-i"; whitespace ignored.
inline cplx parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    auto fail = [&] { throw InvalidParameter("cannot parse complex number '" + text + "'"); };
    if (s.empty()) fail();

    auto parse_real = [&](const std::string& part) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            fail();
        }
        if (used != part.size()) fail();
        return v;
    };
    auto parse_imag = [&](std::string part) {
        part.pop_back();  // trailing i
        if (part.empty() || part == "+") return 1.0;
        if (part == "-") return -1.0;
        return parse_real(part);
    };

    if (s.back() != 'i' && s.back() != 'j') return {parse_real(s), 0.0};
    // split at the last sign that is neither leading nor part of an exponent
    std::size_t split = std::string::npos;
    for (std::size_t i = s.size() - 1; i > 0; --i) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    if (split == std::string::npos) return {0.0, parse_imag(s)};
    return {parse_real(s.substr(0, split)), parse_imag(s.substr(split))};
}

inline std::string format_complex(cplx z) {
    std::string im = io::num(std::abs(z.imag()));
    return io::num(z.real()) + (std::signbit(z.imag()) ? "-" : "+") + im + "i";
}

namespace detail {

inline double json_number(const nlohmann::json& j, const char* key) {
    if (!j.is_number()) throw InvalidParameter(std::string("config key '") + key + "' must be a number");
    return j.get<double>();
}

inline cplx json_complex(const nlohmann::json& j, const char* key) {
    if (j.is_string()) return parse_complex(j.get<std::string>());
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw InvalidParameter(std::string("config key '") + key + "' must be a complex number");
}

inline Format parse_format(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw InvalidParameter("--format must be csv or json, got '" + s + "'");
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter("config file '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw InvalidParameter("config file must hold a JSON object");
    for (const auto& [key, v] : j.items()) {
        const char* k = key.c_str();
        if (key == "omega0") cfg.params.omega0 = json_number(v, k);
        else if (key == "kappa") cfg.params.kappa = json_number(v, k);
        else if (key == "chi") cfg.params.chi = json_number(v, k);
        else if (key == "z") cfg.params.z = json_complex(v, k);
        else if (key == "alpha0") cfg.params.alpha0 = json_complex(v, k);
        else if (key == "t_max") cfg.t_max = json_number(v, k);
        else if (key == "dt") cfg.sample_dt = json_number(v, k);
        else if (key == "ode_tol") cfg.tol.ode_tol = json_number(v, k);
        else if (key == "series_tol") cfg.tol.series_tol = json_number(v, k);
        else if (key == "conv_tol") cfg.tol.conv_tol = json_number(v, k);
        else if (key == "nmax_cap") cfg.nmax_cap = static_cast<std::size_t>(json_number(v, k));
        else if (key == "compare_tol") cfg.compare_tol = json_number(v, k);
        else if (key == "threshold") cfg.revival_threshold = json_number(v, k);
        else if (key == "out") cfg.out = v.get<std::string>();
        else if (key == "format") cfg.format = parse_format(v.get<std::string>());
        else throw InvalidParameter("unknown config key '" + key + "'");
    }
}

}  // namespace detail

// Parses the arguments following the program name.
inline RunConfig parse_config(const std::vector<std::string>& args) {
    CLI::App app{"Coherent-state evolution of a parametric oscillator in a Kerr medium", "kerrpo"};
    std::string command, config_path, out, format = "csv", z_text, alpha0_text;
    double omega0 = 0, kappa = 0, chi = 0, t_max = 0, dt = 0, ode_tol = 0, series_tol = 0, conv_tol = 0;
    double threshold = 0, compare_tol = 0;
    std::size_t nmax_cap = 0;

    std::vector<std::string> names;
    for (const auto& m : kModes) names.emplace_back(m.first);
    app.add_option("command", command, "coeffs | pk | autocorr | oracle | compare | revivals | fig1 | fig2 | fig3")
        ->required()
        ->check(CLI::IsMember(names));
    auto* o_config = app.add_option("--config", config_path, "JSON file with default settings");
    auto* o_omega0 = app.add_option("--omega0", omega0, "oscillator frequency Omega0 (> 0)");
    auto* o_kappa = app.add_option("--kappa", kappa, "pump modulation depth (>= 0)");
    auto* o_chi = app.add_option("--chi", chi, "Kerr coefficient (>= 0)");
    auto* o_z = app.add_option("--z", z_text, "initial coherent amplitude, e.g. 3+3i");
    auto* o_alpha0 = app.add_option("--alpha0", alpha0_text, "averaging amplitude (default |z|)");
    auto* o_tmax = app.add_option("--t-max", t_max, "final time (default 8 pi)");
    auto* o_dt = app.add_option("--dt", dt, "sample spacing (default 8 pi / 2000)");
    auto* o_ode = app.add_option("--ode-tol", ode_tol, "Wei–Norman integrator tolerance");
    auto* o_series = app.add_option("--series-tol", series_tol, "series truncation tolerance");
    auto* o_conv = app.add_option("--conv-tol", conv_tol, "oracle truncation convergence tolerance");
    auto* o_cap = app.add_option("--nmax-cap", nmax_cap, "largest oracle basis size");
    auto* o_thr = app.add_option("--threshold", threshold, "revival detection threshold in (0, 1)");
    auto* o_ctol = app.add_option("--compare-tol", compare_tol, "pass bound for the compare sup-norm");
    auto* o_out = app.add_option("--out", out, "output path (default standard output)");
    auto* o_format = app.add_option("--format", format, "csv or json");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw UsageError(std::string(e.what()) + "\n" + app.help());
    }

    RunConfig cfg;
    if (*o_config) detail::apply_config_file(cfg, config_path);
    for (const auto& [name, mode] : kModes)
        if (command == name) cfg.mode = mode;
    if (*o_omega0) cfg.params.omega0 = omega0;
    if (*o_kappa) cfg.params.kappa = kappa;
    if (*o_chi) cfg.params.chi = chi;
    if (*o_z) cfg.params.z = parse_complex(z_text);
    if (*o_alpha0) cfg.params.alpha0 = parse_complex(alpha0_text);
    if (*o_tmax) cfg.t_max = t_max;
    if (*o_dt) cfg.sample_dt = dt;
    if (*o_ode) cfg.tol.ode_tol = ode_tol;
    if (*o_series) cfg.tol.series_tol = series_tol;
    if (*o_conv) cfg.tol.conv_tol = conv_tol;
    if (*o_cap) cfg.nmax_cap = nmax_cap;
    if (*o_thr) cfg.revival_threshold = threshold;
    if (*o_ctol) cfg.compare_tol = compare_tol;
    if (*o_out) cfg.out = out;
    if (*o_format) cfg.format = detail::parse_format(format);
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Presets

inline ModelParams fig1_params() {
    ModelParams p;
    p.omega0 = 1.0;
    p.kappa = 0.05;
    p.chi = 0.0;
    p.z = {3.0, 3.0};
    p.alpha0 = cplx(std::sqrt(18.0), 0.0);
    return p;
}

// Panels a), b), c): (kappa, chi) = (0.05, 0), (0, 0.25), (0.25, 0.25); z = alpha0 = 2.
inline ModelParams fig2_params(int panel) {
    ModelParams p;
    p.omega0 = 1.0;
    p.z = 2.0;
    p.alpha0 = cplx(2.0, 0.0);
    static constexpr double kappa[] = {0.05, 0.0, 0.25};
    static constexpr double chi[] = {0.0, 0.25, 0.25};
    p.kappa = kappa[panel];
    p.chi = chi[panel];
    return p;
}

inline ModelParams fig3_params() { return fig2_params(2); }

inline constexpr std::array<double, 3> kFig1Times{0.0, 2.0 * kPi, 6.0 * kPi};

// ---------------------------------------------------------------------------
// Runs

inline WNOptions wn_options(const RunConfig& cfg) {
    WNOptions o;
    o.tol = cfg.tol.ode_tol;
    return o;
}

inline SeriesOptions series_options(const RunConfig& cfg) {
    SeriesOptions o;
    o.autocorr_tol = cfg.tol.series_tol;
    o.fock_tol = std::max(cfg.tol.series_tol, 1e-14);
    return o;
}

inline std::vector<double> grid(const RunConfig& cfg) { return ode::uniform_grid(cfg.t_max, cfg.sample_dt); }

inline WNTrajectory run_coeffs(const RunConfig& cfg) {
    const auto g = grid(cfg);
    return integrate_wn_at(cfg.params, g, wn_options(cfg));
}

inline Distribution run_pk(const RunConfig& cfg, double t) {
    const WNState s = wn_state_at(cfg.params, t, wn_options(cfg));
    return distribution(cfg.params, s, t, series_options(cfg));
}

inline TimeSeries approx_autocorrelation(const ModelParams& p, const RunConfig& cfg) {
    const auto g = grid(cfg);
    const WNTrajectory traj = integrate_wn_at(p, g, wn_options(cfg));
    return autocorrelation_series(p, traj, cfg.tol.series_tol);
}

inline ConvergenceReport run_oracle(const ModelParams& p, const RunConfig& cfg) {
    const auto g = grid(cfg);
    return converge_truncation(p, g, cfg.tol.conv_tol, OracleOptions{}, cfg.nmax_cap);
}

inline std::vector<Revival> run_revivals(const RunConfig& cfg) {
    return detect_revivals(approx_autocorrelation(cfg.params, cfg), cfg.revival_threshold);
}

inline std::array<Distribution, 3> run_fig1(const RunConfig& cfg) {
    RunConfig c = cfg;
    c.params = fig1_params();
    std::array<Distribution, 3> out;
    parallel_for(3, [&](std::size_t i) { out[i] = run_pk(c, kFig1Times[i]); });
    return out;
}

struct Fig2Result {
    std::array<TimeSeries, 3> panels;
    TimeSeries reference;
};

inline Fig2Result run_fig2(const RunConfig& cfg) {
    Fig2Result r;
    parallel_for(3, [&](std::size_t i) { r.panels[i] = approx_autocorrelation(fig2_params(static_cast<int>(i)), cfg); });
    const ModelParams p = fig2_params(0);
    r.reference.times = grid(cfg);
    for (double t : r.reference.times) r.reference.values.push_back(reference_coherent_autocorr(p.z, p.omega0, t));
    return r;
}

struct CompareReport {
    double sup_abs2_diff = 0.0;
    double time_of_max_diff = 0.0;
    TimeSeries approx_series;
    TimeSeries oracle_series;
    std::size_t oracle_N = 0;
    double oracle_norm_drift = 0.0;
    ConvergenceReport convergence;
    double tolerance = 0.05;
    bool passed = false;
};

inline CompareReport run_compare(const ModelParams& p, const RunConfig& cfg) {
    CompareReport rep;
    rep.tolerance = cfg.compare_tol;
    auto oracle = std::async(std::launch::async, [&] { return run_oracle(p, cfg); });
    rep.approx_series = approx_autocorrelation(p, cfg);
    rep.convergence = oracle.get();
    rep.oracle_series = rep.convergence.series;
    rep.oracle_N = rep.convergence.n_final;
    rep.oracle_norm_drift = rep.convergence.norm_drift;
    for (std::size_t i = 0; i < rep.approx_series.size(); ++i) {
        const double d = std::abs(std::norm(rep.approx_series.values[i]) - std::norm(rep.oracle_series.values[i]));
        if (d > rep.sup_abs2_diff) {
            rep.sup_abs2_diff = d;
            rep.time_of_max_diff = rep.approx_series.times[i];
        }
    }
    rep.passed = rep.sup_abs2_diff <= rep.tolerance;
    return rep;
}

// ---------------------------------------------------------------------------
// Emission

inline std::vector<std::string> header_lines(const RunConfig& cfg, const ModelParams& p) {
    return {
        "kerrpo " + mode_name(cfg.mode),
        "omega0=" + io::num(p.omega0),
        "kappa=" + io::num(p.kappa),
        "chi=" + io::num(p.chi),
        "z=" + format_complex(p.z),
        "alpha0=" + format_complex(p.averaging_amplitude()),
        "t_max=" + io::num(cfg.t_max),
        "dt=" + io::num(cfg.sample_dt),
        "ode_tol=" + io::num(cfg.tol.ode_tol),
        "series_tol=" + io::num(cfg.tol.series_tol),
        "conv_tol=" + io::num(cfg.tol.conv_tol),
        "nmax_cap=" + std::to_string(cfg.nmax_cap),
    };
}

inline nlohmann::json config_json(const RunConfig& cfg, const ModelParams& p) {
    return {{"command", mode_name(cfg.mode)},
            {"omega0", p.omega0},
            {"kappa", p.kappa},
            {"chi", p.chi},
            {"z", format_complex(p.z)},
            {"alpha0", format_complex(p.averaging_amplitude())},
            {"t_max", cfg.t_max},
            {"dt", cfg.sample_dt},
            {"ode_tol", cfg.tol.ode_tol},
            {"series_tol", cfg.tol.series_tol},
            {"conv_tol", cfg.tol.conv_tol},
            {"nmax_cap", cfg.nmax_cap}};
}

// "dir/run.csv" + "t0" -> "dir/run_t0.csv"
inline std::string suffixed_path(const std::string& path, const std::string& tag) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "_" + tag;
    return path.substr(0, dot) + "_" + tag + path.substr(dot);
}

// Writes either to `stdout_stream` (no --out) or to the file at `path`.
template <class Writer>
void emit(const std::string& path, std::ostream& stdout_stream, Writer&& write) {
    if (path.empty()) {
        write(stdout_stream);
        return;
    }
    std::ofstream f(path);
    if (!f) throw InvalidParameter("cannot open output file '" + path + "'");
    write(f);
}

struct Part {
    std::string tag;
    std::function<void(std::ostream&)> csv;
};

// One CSV per part; on standard output the parts are separated by a blank line.
inline void emit_parts(const RunConfig& cfg, std::ostream& out, const std::vector<Part>& parts) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (cfg.out.empty()) {
            if (i) out << '\n';
            parts[i].csv(out);
        } else {
            emit(suffixed_path(cfg.out, parts[i].tag), out, parts[i].csv);
        }
    }
}

inline void emit_json(const RunConfig& cfg, const ModelParams& p, std::ostream& out, nlohmann::json result) {
    nlohmann::json doc{{"config", config_json(cfg, p)}, {"result", std::move(result)}};
    emit(cfg.out, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
}

inline void write_compare_csv(std::ostream& os, const CompareReport& rep, std::vector<std::string> header) {
    header.push_back("oracle_N=" + std::to_string(rep.oracle_N));
    header.push_back("sup_abs2_diff=" + io::num(rep.sup_abs2_diff));
    header.push_back("time_of_max_diff=" + io::num(rep.time_of_max_diff));
    header.push_back("tolerance=" + io::num(rep.tolerance));
    header.push_back(std::string("passed=") + (rep.passed ? "true" : "false"));
    io::write_header(os, header);
    os << "t,abs2_approx,abs2_oracle,abs2_diff\n";
    for (std::size_t i = 0; i < rep.approx_series.size(); ++i) {
        const double a = std::norm(rep.approx_series.values[i]);
        const double o = std::norm(rep.oracle_series.values[i]);
        os << io::num(rep.approx_series.times[i]) << ',' << io::num(a) << ',' << io::num(o) << ','
           << io::num(std::abs(a - o)) << '\n';
    }
}

inline nlohmann::json compare_json(const CompareReport& rep) {
    return {{"sup_abs2_diff", rep.sup_abs2_diff},
            {"time_of_max_diff", rep.time_of_max_diff},
            {"oracle_N", rep.oracle_N},
            {"oracle_norm_drift", rep.oracle_norm_drift},
            {"tolerance", rep.tolerance},
            {"passed", rep.passed},
            {"convergence", io::convergence_json(rep.convergence)},
            {"approx", io::to_json(rep.approx_series)},
            {"oracle", io::to_json(rep.oracle_series)}};
}

inline void execute(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    const bool json = cfg.format == Format::json;
    switch (cfg.mode) {
    case Mode::coeffs: {
        const WNTrajectory traj = run_coeffs(cfg);
        if (json) return emit_json(cfg, cfg.params, out, io::to_json(traj));
        emit(cfg.out, out, [&](std::ostream& os) { io::write_trajectory_csv(os, traj, header_lines(cfg, cfg.params)); });
        return;
    }
    case Mode::pk: {
        const Distribution d = run_pk(cfg, cfg.t_max);
        if (json) return emit_json(cfg, cfg.params, out, io::to_json(d));
        emit(cfg.out, out, [&](std::ostream& os) {
            auto h = header_lines(cfg, cfg.params);
            h.push_back("t=" + io::num(d.time));
            io::write_distribution_csv(os, d, h);
        });
        return;
    }
    case Mode::autocorr: {
        const TimeSeries ts = approx_autocorrelation(cfg.params, cfg);
        if (json) return emit_json(cfg, cfg.params, out, io::to_json(ts));
        emit(cfg.out, out, [&](std::ostream& os) { io::write_timeseries_csv(os, ts, header_lines(cfg, cfg.params)); });
        return;
    }
    case Mode::oracle: {
        const ConvergenceReport rep = run_oracle(cfg.params, cfg);
        if (json)
            return emit_json(cfg, cfg.params, out,
                             {{"series", io::to_json(rep.series)},
                              {"convergence", io::convergence_json(rep)},
                              {"norm_drift", rep.norm_drift}});
        auto h = header_lines(cfg, cfg.params);
        h.push_back("convergence=" + io::convergence_json(rep).dump());
        h.push_back("norm_drift=" + io::num(rep.norm_drift));
        emit(cfg.out, out, [&](std::ostream& os) { io::write_timeseries_csv(os, rep.series, h); });
        if (!cfg.out.empty())
            emit(suffixed_path(cfg.out, "convergence") + ".json", out,
                 [&](std::ostream& os) { os << io::convergence_json(rep).dump(2) << '\n'; });
        return;
    }
    case Mode::compare:
    case Mode::fig3: {
        const ModelParams p = cfg.mode == Mode::fig3 ? fig3_params() : cfg.params;
        const CompareReport rep = run_compare(p, cfg);
        log << "compare: sup |F|^2 difference " << io::num(rep.sup_abs2_diff) << " at t = "
            << io::num(rep.time_of_max_diff) << " (oracle N = " << rep.oracle_N << ", bound "
            << io::num(rep.tolerance) << ") " << (rep.passed ? "PASS" : "FAIL") << '\n';
        if (json) return emit_json(cfg, p, out, compare_json(rep));
        emit(cfg.out, out, [&](std::ostream& os) { write_compare_csv(os, rep, header_lines(cfg, p)); });
        return;
    }
    case Mode::revivals: {
        const auto peaks = run_revivals(cfg);
        auto h = header_lines(cfg, cfg.params);
        h.push_back("threshold=" + io::num(cfg.revival_threshold));
        if (cfg.params.chi > 0.0) h.push_back("T_rev=" + io::num(revival_time(cfg.params)));
        if (json) {
            nlohmann::json r{{"peaks", io::to_json(peaks)}, {"threshold", cfg.revival_threshold}};
            if (cfg.params.chi > 0.0) r["T_rev"] = revival_time(cfg.params);
            return emit_json(cfg, cfg.params, out, r);
        }
        emit(cfg.out, out, [&](std::ostream& os) { io::write_revivals_csv(os, peaks, h); });
        return;
    }
    case Mode::fig1: {
        const ModelParams p = fig1_params();
        const auto dists = run_fig1(cfg);
        static const char* tags[] = {"t0", "t2pi", "t6pi"};
        if (json) {
            nlohmann::json r = nlohmann::json::array();
            for (const auto& d : dists) r.push_back(io::to_json(d));
            return emit_json(cfg, p, out, r);
        }
        std::vector<Part> parts;
        for (std::size_t i = 0; i < 3; ++i)
            parts.push_back({tags[i], [&, i](std::ostream& os) {
                                 auto h = header_lines(cfg, p);
                                 h.push_back("t=" + io::num(dists[i].time));
                                 io::write_distribution_csv(os, dists[i], h);
                             }});
        emit_parts(cfg, out, parts);
        return;
    }
    case Mode::fig2: {
        const Fig2Result r = run_fig2(cfg);
        static const char* tags[] = {"a", "b", "c"};
        if (json) {
            nlohmann::json j;
            for (int i = 0; i < 3; ++i)
                j[tags[i]] = {{"config", config_json(cfg, fig2_params(i))}, {"series", io::to_json(r.panels[i])}};
            j["reference"] = io::to_json(r.reference);
            return emit_json(cfg, fig2_params(0), out, j);
        }
        std::vector<Part> parts;
        for (int i = 0; i < 3; ++i)
            parts.push_back({tags[i], [&, i](std::ostream& os) {
                                 io::write_timeseries_csv(os, r.panels[i], header_lines(cfg, fig2_params(i)));
                             }});
        parts.push_back({"reference", [&](std::ostream& os) {
                             auto h = header_lines(cfg, fig2_params(0));
                             h.push_back("series=reference coherent state");
                             io::write_timeseries_csv(os, r.reference, h);
                         }});
        emit_parts(cfg, out, parts);
        return;
    }
    }
}

// Full command-line entry point; returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const HelpRequested& h) {
        out << h.text;
        return 0;
    } catch (const Error& e) {
        err << "kerrpo: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    }
    try {
        execute(cfg, out, err);
    } catch (const Error& e) {
        err << "kerrpo: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    }
    return 0;
}

}  // namespace kerrpo::cli
