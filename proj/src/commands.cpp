#include "kinklat/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kinklat/errors.hpp"
#include "kinklat/flaschka.hpp"
#include "kinklat/phi4.hpp"

namespace kinklat {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json to_json(const DriftReport& d) {
    json samples = json::array();
    for (const auto& s : d.samples) samples.push_back({s.time, s.value});
    return {{"k", d.k},
            {"max_abs_drift", d.max_abs_drift},
            {"relative_drift", d.relative_drift},
            {"secular_slope", d.secular_slope},
            {"samples", samples}};
}

json to_json(const IntegrabilityReport& r) {
    json drifts = json::array();
    for (std::size_t i = 0; i < r.drifts.size(); ++i) {
        json d = to_json(r.drifts[i]);
        d["secular"] = static_cast<bool>(r.secular[i]);
        d["baseline_relative_drift"] = r.baseline_drifts[i].relative_drift;
        d["baseline_secular_slope"] = r.baseline_drifts[i].secular_slope;
        drifts.push_back(std::move(d));
    }
    json bridge = json::array();
    for (const auto& b : r.bridge) {
        bridge.push_back({{"k", b.k}, {"max_abs_mismatch", b.max_abs_mismatch}, {"max_abs_rate", b.max_abs_rate}});
    }
    json out = {{"sites", r.sites},
                {"boundary", r.boundary},
                {"final_time", r.final_time},
                {"dt", r.dt},
                {"scheme", to_string(r.scheme)},
                {"drifts", drifts},
                {"skipped_k", r.skipped_k},
                {"residual_sum", r.residual_sum},
                {"max_abs_residual", r.max_abs_residual},
                {"max_ratio_mismatch", r.max_ratio_mismatch},
                {"bridge", bridge},
                {"verdict", r.verdict}};
    out["lambda"] = r.lambda ? json(*r.lambda) : json(nullptr);
    out["dominant_pair"] = r.dominant_pair ? json({*r.dominant_pair, *r.dominant_pair + 1}) : json(nullptr);
    return out;
}

json to_json(const moser::ProbeReport& r) {
    json samples = json::array();
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        const auto& m = r.samples[i];
        samples.push_back({{"t", r.times[i]}, {"lambda1", m.lambda1}, {"lambda2", m.lambda2}, {"r1", m.r1},
                           {"r2", m.r2}});
    }
    return {{"max_eigenvalue_deviation", r.max_eigenvalue_deviation},
            {"predicted_log_ratio_rate", r.predicted_log_ratio_rate},
            {"max_ratio_deviation", r.max_ratio_deviation},
            {"samples", samples}};
}

void cmd_coeffs(int n_max, std::ostream& out) {
    if (n_max < 1) throw ConfigError("coeffs: n_max must be at least 1");
    if (n_max > 50) throw ConfigError("coeffs: n_max must be at most 50");
    out << "n,alpha,beta,k,identity\n";
    for (int n = 1; n <= n_max; ++n) {
        const phi4::Rational a = phi4::alpha_exact(n);
        const phi4::Rational b = phi4::beta_exact(n);
        // alpha + (n+1) beta / 2 over the common denominator 2 a.den b.den
        const std::int64_t id = 2 * a.num * b.den + static_cast<std::int64_t>(n + 1) * b.num * a.den;
        if (id != 0) throw InvariantViolation("alpha/beta identity fails at n = " + std::to_string(n));
        out << n << ',' << format_real(a.value()) << ',' << format_real(b.value()) << ','
            << format_real(0.5 * (n + 1)) << ",0\n";
    }
}

void cmd_chi(double a1, int order, double coupling, double vacuum, std::ostream& out) {
    if (order < 1) throw ConfigError("chi: order must be at least 1");
    const phi4::Phi4Params params(coupling, vacuum);
    const phi4::ChiExpansion chi = phi4::chi_coefficients(params, a1, order);
    out << "k,a_k\n";
    for (int k = 1; k <= chi.order(); ++k) {
        out << k << ',' << format_real(chi.coefficients[static_cast<std::size_t>(k - 1)]) << '\n';
    }
}

namespace {

void ensure_writable(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("output directory '" + dir + "' cannot be created");
    const fs::path probe = fs::path(dir) / ".kinklat-write-probe";
    {
        std::ofstream f(probe);
        if (!f) throw ConfigError("output directory '" + dir + "' is not writable");
    }
    fs::remove(probe, ec);
}

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("failed writing " + name);
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

std::vector<double> amplitudes(const FlaschkaState& fs) {
    std::vector<double> a;
    for (double w : fs.w) a.push_back(std::sqrt(w));
    return a;
}

}  // namespace

json cmd_simulate(const RunConfig& cfg) {
    require_valid(cfg.model);
    ensure_writable(cfg.output_dir);
    const PhaseState s0 = initial_state(cfg);
    const auto& in = cfg.integration;
    const Trajectory traj = integrate(cfg.model, s0, in.dt, in.steps, in.sample_every, in.scheme);

    const std::size_t n = cfg.model.sites;
    const int kmax = static_cast<int>(std::min<std::size_t>(n, 5));
    std::optional<double> lam = cfg.lambda;
    if (cfg.model.boundary == Boundary::periodic && !lam) lam = 1.0;

    std::ostringstream csv;
    csv << "t";
    for (std::size_t i = 0; i < n; ++i) csv << ",q" << i;
    for (std::size_t i = 0; i < n; ++i) csv << ",p" << i;
    csv << ",energy";
    for (int k = 1; k <= kmax; ++k) csv << ",H" << k;
    csv << '\n';
    double max_p = 0.0;
    for (std::size_t r = 0; r < traj.states.size(); ++r) {
        const PhaseState& s = traj.states[r];
        csv << format_real(traj.times[r]);
        for (double x : s.q) csv << ',' << format_real(x);
        for (double x : s.p) {
            csv << ',' << format_real(x);
            max_p = std::max(max_p, std::abs(x));
        }
        csv << ',' << format_real(hamiltonian(cfg.model, s));
        const FlaschkaState fsr = to_flaschka(cfg.model, s);
        for (int k = 1; k <= kmax; ++k) {
            double h = std::nan("");
            try {
                h = trace_invariant(fsr, k, cfg.model.boundary, lam);
            } catch (const ComplexValueError&) {
            }
            csv << ',' << format_real(h);
        }
        csv << '\n';
    }

    const IntegrabilityReport rep = analyze_trajectory(cfg.model, traj, lam);
    const double momentum_bound = 1e-12 * static_cast<double>(n) * std::max(max_p, 1.0);
    if (!rep.drifts.empty() && rep.drifts.front().max_abs_drift > momentum_bound) {
        throw InvariantViolation("total momentum drifted by " + format_real(rep.drifts.front().max_abs_drift));
    }

    json report = to_json(rep);
    report["seed"] = cfg.seed;
    report["steps"] = in.steps;
    report["sample_every"] = in.sample_every;
    report["initial_state"] = {{"q", s0.q}, {"p", s0.p}};
    write_text(cfg.output_dir, "trajectory.csv", csv.str());
    write_text(cfg.output_dir, "report.json", dump(report));
    return report;
}

json cmd_laxcheck(const RunConfig& cfg) {
    require_valid(cfg.model);
    ensure_writable(cfg.output_dir);
    const PhaseState s0 = initial_state(cfg);
    std::optional<double> lam = cfg.lambda;
    if (cfg.model.boundary == Boundary::periodic && !lam) lam = 1.0;

    const FlaschkaState fs = to_flaschka(cfg.model, s0);
    const ComplexMatrix delta = lax_residual(cfg.model, s0, lam);
    json entries = json::array();
    double max_abs = 0.0;
    for (Eigen::Index i = 0; i < delta.rows(); ++i) {
        for (Eigen::Index j = 0; j < delta.cols(); ++j) {
            const auto z = delta(i, j);
            max_abs = std::max(max_abs, std::abs(z));
            if (z != std::complex<double>(0.0, 0.0)) {
                entries.push_back({{"row", i}, {"col", j}, {"re", z.real()}, {"im", z.imag()}});
            }
        }
    }
    json out = {{"sites", cfg.model.sites},
                {"boundary", to_string(cfg.model.boundary)},
                {"w", fs.w},
                {"b", fs.b},
                {"rho", fs.rho},
                {"delta_entries", entries},
                {"delta_max_abs", max_abs},
                {"constraint_residuals", constraint_residuals(cfg.model, s0)}};
    out["lambda"] = lam ? json(*lam) : json(nullptr);

    const bool positive = std::all_of(fs.w.begin(), fs.w.end(), [](double w) { return w > 0.0; });
    if (cfg.model.boundary == Boundary::open && positive && cfg.model.sites >= 3) {
        const M3Residual m3 = m3_residual(fs);
        const std::vector<double> a = amplitudes(fs);
        json rows = json::array();
        for (const auto& e : m3.out_of_pattern) {
            const std::size_t i = e.row;
            const double cross = a[i + 1] * fs.rho[i] * a[i] - a[i] * fs.rho[i + 1] * a[i + 1];
            const double closed =
                e.col == i + 2 ? (fs.b[i + 1] + fs.b[i + 2]) * cross : a[i + 2] * cross;
            rows.push_back({{"row", e.row}, {"col", e.col}, {"assembled", e.value}, {"closed_form", closed}});
        }
        out["m3_out_of_pattern"] = rows;
        out["m3_in_pattern_max"] = m3.in_pattern_max;
    }
    write_text(cfg.output_dir, "laxcheck.json", dump(out));
    return out;
}

json cmd_bracket(const RunConfig& cfg, int k1, int k2) {
    require_valid(cfg.model);
    if (k1 < 1 || k2 < 1 || k1 > max_trace_power || k2 > max_trace_power) {
        throw ConfigError("bracket: k1, k2 must lie in 1.." + std::to_string(max_trace_power));
    }
    ensure_writable(cfg.output_dir);
    const PhaseState s0 = initial_state(cfg);
    std::optional<double> lam = cfg.lambda;
    if (cfg.model.boundary == Boundary::periodic && !lam) lam = 1.0;

    const double value = poisson_bracket(cfg.model, k1, k2, s0, lam);
    json out = {{"k1", k1}, {"k2", k2}, {"value", value}};
    out["closed_form"] = nullptr;
    if (cfg.model.boundary == Boundary::open && std::min(k1, k2) == 2 && std::max(k1, k2) == 3) {
        // {H2, H3} = -2 sum_i w_i w_{i+1} (rho_{i+1} - rho_i)
        const FlaschkaState fs = to_flaschka(cfg.model, s0);
        double closed = 0.0;
        for (std::size_t i = 0; i + 1 < fs.w.size(); ++i) {
            closed += -2.0 * fs.w[i] * fs.w[i + 1] * (fs.rho[i + 1] - fs.rho[i]);
        }
        if (k1 == 3) closed = -closed;
        out["closed_form"] = closed;
        out["difference"] = value - closed;
    } else if (k1 == 1 || k2 == 1 || k1 == k2) {
        out["closed_form"] = 0.0;
        out["difference"] = value;
    }
    write_text(cfg.output_dir, "bracket.json", dump(out));
    return out;
}

json cmd_moser(const RunConfig& cfg) {
    require_valid(cfg.model);
    ensure_writable(cfg.output_dir);
    const PhaseState s0 = initial_state(cfg);
    const auto& in = cfg.integration;
    const moser::ProbeReport rep =
        moser::moser_flow_probe(cfg.model, s0, in.dt, in.steps, in.scheme, in.sample_every);
    json out = to_json(rep);
    write_text(cfg.output_dir, "moser.json", dump(out));
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deformed Toda lattices from phi^4 kink-antikink interactions", "kinklat"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("--quiet", quiet, "Suppress stdout output");

    int coeff_terms = 3;
    auto* coeffs = app.add_subcommand("coeffs", "Interaction coefficient table");
    coeffs->add_option("--terms", coeff_terms, "Largest order n");

    const phi4::Phi4Params norm = phi4::Phi4Params::normalized();
    double a1 = -2.0 * norm.vacuum();
    int chi_order = 6;
    double coupling = norm.coupling();
    double vacuum = norm.vacuum();
    auto* chi = app.add_subcommand("chi", "Vacuum fluctuation tail coefficients");
    chi->add_option("--a1", a1, "Leading coefficient (default -2v)");
    chi->add_option("--order", chi_order, "Number of coefficients K");
    chi->add_option("--coupling", coupling, "Quartic coupling");
    chi->add_option("--vacuum", vacuum, "Vacuum value v");

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string scheme_name;
    std::optional<int> terms;
    int k1 = 2, k2 = 3;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides config)");
        sub->add_option("--seed", seed, "Random-state seed (overrides config)");
        sub->add_option("--scheme", scheme_name, "verlet | yoshida4 | rk4");
        sub->add_option("--terms", terms, "Use the kink interaction truncated at this order");
    };
    auto* simulate = app.add_subcommand("simulate", "Integrate and write trajectory plus report");
    auto* laxcheck = app.add_subcommand("laxcheck", "Lax residual at the initial state");
    auto* bracket = app.add_subcommand("bracket", "Poisson bracket of two trace invariants");
    auto* moser_cmd = app.add_subcommand("moser", "Follow Moser variables of a two-site chain");
    for (auto* sub : {simulate, laxcheck, bracket, moser_cmd}) add_common(sub);
    bracket->add_option("--k1", k1, "First invariant index");
    bracket->add_option("--k2", k2, "Second invariant index");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "kinklat: " << e.what() << "\n";
        return exit_code::usage;
    }

    try {
        if (coeffs->parsed()) {
            std::ostringstream buf;
            cmd_coeffs(coeff_terms, buf);
            if (!quiet) out << buf.str();
            return exit_code::ok;
        }
        if (chi->parsed()) {
            std::ostringstream buf;
            cmd_chi(a1, chi_order, coupling, vacuum, buf);
            if (!quiet) out << buf.str();
            return exit_code::ok;
        }
        RunConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed) cfg.seed = *seed;
        if (!scheme_name.empty()) {
            try {
                cfg.integration.scheme = scheme_from_string(scheme_name);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("--scheme: ") + e.what());
            }
        }
        if (terms) apply_terms_override(cfg, *terms);

        json result;
        if (simulate->parsed()) {
            result = cmd_simulate(cfg);
            if (!quiet) {
                out << "verdict: " << result["verdict"].get<std::string>() << "\n"
                    << "wrote " << (fs::path(cfg.output_dir) / "trajectory.csv").string() << " and "
                    << (fs::path(cfg.output_dir) / "report.json").string() << "\n";
            }
            return exit_code::ok;
        }
        if (laxcheck->parsed()) result = cmd_laxcheck(cfg);
        if (bracket->parsed()) result = cmd_bracket(cfg, k1, k2);
        if (moser_cmd->parsed()) result = cmd_moser(cfg);
        if (!quiet) out << dump(result);
        return exit_code::ok;
    } catch (const BlowUpError& e) {
        err << "kinklat: blow-up: " << e.what() << "\n";
        return exit_code::blow_up;
    } catch (const InvariantViolation& e) {
        err << "kinklat: invariant violation: " << e.what() << "\n";
        return exit_code::invariant;
    } catch (const std::exception& e) {
        err << "kinklat: " << e.what() << "\n";
        return exit_code::usage;
    }
}

}  // namespace kinklat
