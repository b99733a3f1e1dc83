/**
 * @file cli_app.hpp
 * @brief The `dipolar` command-line program as a callable function, so the
 *        test suite can drive it in-process.
 *
 * Exit codes: 0 success, 2 invalid input, 3 quadrature failure,
 * 4 verification failure.
 */
#pragma once

#include "dipolar/dipolar.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dipolar::cli {

enum ExitCode : int { ok = 0, invalid_input = 2, quadrature_failure = 3, verification_failure = 4 };

inline constexpr const char* rel_tol_env = "DIPOLAR_REL_TOL";

/// 12 significant digits, shortest general form, locale independent.
inline std::string fmt(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

struct RunConfig {
    std::string command;
    Material material{};
    double P = 1.0;
    // Grid: normalized r' for profile, physical r for convolve.
    double r_min = 1e-3;
    double r_max = 20.0;
    int n_points = 200;
    double r = 1.0;
    std::vector<double> nu_values;
    QuadratureSpec quad{};
    std::string output;
    std::string summary;
    std::string csv;
    bool gnuplot = false;
    std::uint64_t seed = 20240601;
    int samples = 100;
    double corrupt = 0.0;
    std::string shape = "disc";
    double radius = 1.0;
    double pressure = 1.0;
    double conv_rel_tol = ConvolutionSpec{}.rel_tol;

    nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["mu"] = material.mu;
        j["nu"] = material.nu;
        j["c"] = material.c;
        j["rel_tol"] = quad.rel_tol;
        j["abs_tol"] = quad.abs_tol;
        j["max_zero_intervals"] = quad.max_zero_intervals;
        j["tail_start"] = quad.tail_start;
        if (command == "profile") {
            j["r_min"] = r_min;
            j["r_max"] = r_max;
            j["n_points"] = n_points;
        } else if (command == "point") {
            j["P"] = P;
            j["r"] = r;
        } else if (command == "sweep") {
            j["nu_values"] = nu_values;
        } else if (command == "verify") {
            j["P"] = P;
            j["samples"] = samples;
            j["seed"] = seed;
            if (corrupt != 0.0)
                j["corrupt_coefficient"] = corrupt;
        } else if (command == "convolve") {
            j["shape"] = shape;
            j["radius"] = radius;
            j["pressure"] = pressure;
            j["r_max"] = r_max;
            j["n_points"] = n_points;
            j["conv_rel_tol"] = conv_rel_tol;
        }
        j["output"] = output.empty() ? "-" : output;
        return j;
    }
};

/// Raised for configuration problems detected after parsing.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg)
{
    if (!cond)
        throw InputError(msg);
}

inline void validate(const RunConfig& cfg)
{
    if (cfg.command == "sweep") {
        Material probe = cfg.material;
        for (double nu : cfg.nu_values) {
            probe.nu = nu;
            if (auto e = dipolar::validate(probe))
                throw InputError("nu-values: " + e->message);
        }
        require(cfg.nu_values.size() >= 2, "sweep needs at least two nu values");
    } else if (auto e = dipolar::validate(cfg.material)) {
        throw InputError(e->message);
    }
    try {
        cfg.quad.check();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    require(std::isfinite(cfg.P), "P must be finite");
    require(cfg.n_points >= 2, "n-points must be >= 2");
    require(cfg.r_max > 0.0 && std::isfinite(cfg.r_max), "r-max must be positive");
    if (cfg.command == "profile")
        require(cfg.r_min > 0.0 && cfg.r_min < cfg.r_max, "need 0 < r-min < r-max");
    if (cfg.command == "point")
        require(cfg.r >= 0.0 && std::isfinite(cfg.r), "r must be >= 0");
    if (cfg.command == "verify") {
        require(cfg.samples >= 1, "samples must be >= 1");
        require(std::isfinite(cfg.corrupt), "corrupt-coefficient must be finite");
        require(!cfg.gnuplot, "--gnuplot is not available for verify");
    }
    if (cfg.command == "convolve") {
        require(cfg.shape == "disc", "shape must be 'disc'");
        require(cfg.radius > 0.0 && std::isfinite(cfg.radius), "radius must be positive");
        require(std::isfinite(cfg.pressure), "pressure must be finite");
        require(cfg.conv_rel_tol > 0.0, "conv-rel-tol must be positive");
    }
    require(!cfg.gnuplot || !cfg.output.empty(), "--gnuplot needs -o");
}

inline void write_gnuplot(const RunConfig& cfg, const std::string& x, const std::vector<std::string>& ys)
{
    std::ofstream gp(cfg.output + ".gp");
    if (!gp)
        throw InputError("cannot write " + cfg.output + ".gp");
    gp << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set xlabel '" << x << "'\n"
       << "plot ";
    for (std::size_t i = 0; i < ys.size(); ++i)
        gp << (i ? ", \\\n     " : "") << "'" << cfg.output << "' using '" << x << "':'" << ys[i]
           << "' with lines";
    gp << "\npause -1\n";
}

inline int run_profile(const RunConfig& cfg, std::ostream& out, nlohmann::ordered_json& summary)
{
    const auto grid = default_profile_grid(cfg.r_min, cfg.r_max, cfg.n_points);
    const auto prof = surface_profile(grid, cfg.material.nu, cfg.quad);
    const bool good = prof.converged();
    out << "r_prime,u3_hat,ur_hat,u3_classical_hat,ur_classical_hat,quad_err_u3,quad_err_ur"
        << (good ? "" : ",converged") << '\n';
    int failed = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool conv = prof.quad_u3[i].converged && prof.quad_ur[i].converged;
        failed += conv ? 0 : 1;
        out << fmt(prof.r_prime[i]) << ',' << fmt(prof.u3_hat[i]) << ',' << fmt(prof.ur_hat[i]) << ','
            << (prof.u3_class_hat[i] ? fmt(*prof.u3_class_hat[i]) : "") << ','
            << (prof.ur_class_hat[i] ? fmt(*prof.ur_class_hat[i]) : "") << ',' << fmt(prof.quad_u3[i].err_est)
            << ',' << fmt(prof.quad_ur[i].err_est);
        if (!good)
            out << ',' << (conv ? 1 : 0);
        out << '\n';
    }
    summary["rows"] = grid.size();
    summary["nonconverged_rows"] = failed;
    if (cfg.gnuplot)
        write_gnuplot(cfg, "r_prime", {"u3_hat", "ur_hat", "u3_classical_hat", "ur_classical_hat"});
    return good ? ok : quadrature_failure;
}

inline int run_point(const RunConfig& cfg, std::ostream& out, nlohmann::ordered_json& summary)
{
    const double rp = normalize_radius(cfg.r, cfg.material.c);
    const auto a = u3_hat_result(rp, cfg.material.nu, cfg.quad);
    const auto b = ur_hat_result(rp, cfg.material.nu, cfg.quad);
    const auto u = dimensionalize(b.value, a.value, cfg.material, PointLoad{cfg.P});
    const bool good = a.converged && b.converged;
    out << "r,r_prime,ur,u3,ur_hat,u3_hat,quad_err_ur,quad_err_u3" << (good ? "" : ",converged") << '\n';
    out << fmt(cfg.r) << ',' << fmt(rp) << ',' << fmt(u.ur) << ',' << fmt(u.u3) << ',' << fmt(b.value) << ','
        << fmt(a.value) << ',' << fmt(b.err_est) << ',' << fmt(a.err_est);
    if (!good)
        out << ",0";
    out << '\n';
    summary["ur"] = u.ur;
    summary["u3"] = u.u3;
    if (cfg.gnuplot)
        write_gnuplot(cfg, "r", {"u3"});
    return good ? ok : quadrature_failure;
}

inline int run_sweep(const RunConfig& cfg, std::ostream& out, nlohmann::ordered_json& summary)
{
    std::vector<QuadratureResult> res;
    bool good = true;
    for (double nu : cfg.nu_values) {
        res.push_back(u3_hat_result(0.0, nu, cfg.quad));
        good = good && res.back().converged;
    }
    // Same least-squares line as settlement_fit, on the values just computed.
    const double n = static_cast<double>(res.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        mx += cfg.nu_values[i] / n;
        my += res[i].value / n;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        sxx += (cfg.nu_values[i] - mx) * (cfg.nu_values[i] - mx);
        sxy += (cfg.nu_values[i] - mx) * (res[i].value - my);
    }
    if (!(sxx > 0.0))
        throw InputError("nu values must not all coincide");
    const double slope = sxy / sxx, intercept = my - slope * mx;

    out << "nu,u3_hat_origin,quad_err" << (good ? "" : ",converged") << '\n';
    for (std::size_t i = 0; i < res.size(); ++i) {
        out << fmt(cfg.nu_values[i]) << ',' << fmt(res[i].value) << ',' << fmt(res[i].err_est);
        if (!good)
            out << ',' << (res[i].converged ? 1 : 0);
        out << '\n';
    }
    out << "fit," << fmt(intercept) << ',' << fmt(slope) << '\n';
    summary["intercept"] = intercept;
    summary["slope"] = slope;
    if (cfg.gnuplot)
        write_gnuplot(cfg, "nu", {"u3_hat_origin"});
    return good ? ok : quadrature_failure;
}

inline std::string fmt_complex(transform::cplx z) { return "(" + fmt(z.real()) + "," + fmt(z.imag()) + ")"; }

inline int run_verify(const RunConfig& cfg, std::ostream& out, nlohmann::ordered_json& summary)
{
    transform::VerifyOptions opt;
    opt.samples = cfg.samples;
    opt.seed = cfg.seed;
    opt.corrupt_A1 = cfg.corrupt;
    const auto rep = transform::verify_transform(cfg.material, PointLoad{cfg.P}, opt);
    const auto& w = rep.records.at(static_cast<std::size_t>(rep.worst_sample));

    out << "samples: " << rep.samples << '\n'
        << "seed: " << rep.seed << '\n'
        << "max_boundary_residual: " << fmt(rep.max_bc) << " (threshold " << fmt(opt.bc_threshold) << ")\n"
        << "max_ode_residual: " << fmt(rep.max_ode) << " (threshold " << fmt(opt.ode_threshold) << ")\n"
        << "max_route_mismatch: " << fmt(rep.max_route) << " (threshold " << fmt(opt.route_threshold) << ")\n"
        << "det_max_root_residual: " << fmt(rep.max_det_root) << " (threshold " << fmt(opt.det.root) << ")\n"
        << "det_min_third_order: " << fmt(rep.min_det_third) << " (threshold " << fmt(opt.det.third_order)
        << ")\n"
        << "det_min_nonroot: " << fmt(rep.min_det_nonroot) << " (threshold " << fmt(opt.det.nonroot) << ")\n"
        << "det_roots: +beta -beta +gamma -gamma, multiplicity 3\n"
        << "det_leading_constant_max_rel_error: " << fmt(rep.max_leading_constant_error) << '\n'
        << "worst_sample: " << w.index << " p=" << fmt_complex(w.p) << " q=" << fmt_complex(w.q)
        << " x3=" << fmt(w.x3) << " bc=" << fmt(w.bc) << " ("
        << transform::BoundaryResiduals{}.names[static_cast<std::size_t>(w.bc_worst)] << ") ode=" << fmt(w.ode)
        << '\n'
        << "result: " << (rep.pass ? "PASS" : "FAIL") << '\n';

    if (!cfg.csv.empty()) {
        std::ofstream f(cfg.csv);
        if (!f)
            throw InputError("cannot write " + cfg.csv);
        f << "index,p_re,p_im,q_re,q_im,x3,bc_residual,ode_residual,det_root,det_third,det_nonroot,route,pass\n";
        for (const auto& r : rep.records)
            f << r.index << ',' << fmt(r.p.real()) << ',' << fmt(r.p.imag()) << ',' << fmt(r.q.real()) << ','
              << fmt(r.q.imag()) << ',' << fmt(r.x3) << ',' << fmt(r.bc) << ',' << fmt(r.ode) << ','
              << fmt(r.det_root) << ',' << fmt(r.det_third) << ',' << fmt(r.det_nonroot) << ',' << fmt(r.route)
              << ',' << (r.pass ? 1 : 0) << '\n';
    }
    summary["max_boundary_residual"] = rep.max_bc;
    summary["max_ode_residual"] = rep.max_ode;
    summary["det_max_root_residual"] = rep.max_det_root;
    summary["worst_sample"] = rep.worst_sample;
    summary["pass"] = rep.pass;
    return rep.pass ? ok : verification_failure;
}

inline int run_convolve(const RunConfig& cfg, std::ostream& out, nlohmann::ordered_json& summary)
{
    std::vector<double> radii;
    for (int i = 0; i < cfg.n_points; ++i)
        radii.push_back(i == cfg.n_points - 1 ? cfg.r_max : cfg.r_max * i / (cfg.n_points - 1));
    ConvolutionSpec cs;
    cs.rel_tol = cfg.conv_rel_tol;
    cs.kernel = cfg.quad;
    const auto prof = settlement_profile(uniform_disc(cfg.pressure, cfg.radius), cfg.material, radii, cs);
    out << "r,u3" << (prof.converged ? "" : ",err_est") << '\n';
    for (std::size_t i = 0; i < radii.size(); ++i) {
        out << fmt(prof.r[i]) << ',' << fmt(prof.u3[i]);
        if (!prof.converged)
            out << ',' << fmt(prof.err_est[i]);
        out << '\n';
    }
    summary["rows"] = radii.size();
    summary["center_u3"] = prof.u3.front();
    if (cfg.gnuplot)
        write_gnuplot(cfg, "r", {"u3"});
    return prof.converged ? ok : quadrature_failure;
}

inline std::optional<double> env_rel_tol()
{
    const char* s = std::getenv(rel_tol_env);
    if (!s || !*s)
        return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(s, s + std::strlen(s), v);
    if (res.ec != std::errc{} || *res.ptr != '\0' || !(v > 0.0))
        throw InputError(std::string(rel_tol_env) + " must be a positive number");
    return v;
}

} // namespace detail

/**
 * Runs the program. CSV and reports go to `out` (or the -o file); the
 * resolved configuration and diagnostics go to `err`.
 */
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    RunConfig cfg;
    try {
        if (auto v = detail::env_rel_tol())
            cfg.quad.rel_tol = *v;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return invalid_input;
    }

    CLI::App app{"Surface displacements of a half-space in dipolar gradient elasticity under a normal point load"};
    app.set_config("--config", "", "INI or TOML file with option values (flags take precedence)");
    app.require_subcommand(1);
    app.fallthrough();

    auto* material = "Material";
    app.add_option("--mu", cfg.material.mu, "Shear modulus")->group(material)->capture_default_str();
    app.add_option("--nu", cfg.material.nu, "Poisson ratio")->group(material)->capture_default_str();
    app.add_option("--c", cfg.material.c, "Gradient coefficient (length^2)")->group(material)->capture_default_str();
    app.add_option("--P", cfg.P, "Point load magnitude")->capture_default_str();

    app.add_option("--r-min", cfg.r_min, "Smallest nonzero r' of the profile grid")->capture_default_str();
    app.add_option("--r-max", cfg.r_max, "Largest radius (r' for profile, r for convolve)")->capture_default_str();
    app.add_option("--n-points", cfg.n_points, "Number of grid points")->capture_default_str();
    app.add_option("--r", cfg.r, "Radius for the point command")->capture_default_str();
    app.add_option("--nu-values", cfg.nu_values, "Poisson ratios for sweep (default 0, 0.05, ..., 0.45)")
        ->delimiter(',');

    auto* tol = "Tolerances";
    app.add_option("--rel-tol", cfg.quad.rel_tol,
                   std::string("Relative quadrature tolerance (default from ") + rel_tol_env + " if set)")
        ->group(tol)
        ->capture_default_str();
    app.add_option("--abs-tol", cfg.quad.abs_tol, "Absolute quadrature tolerance")->group(tol)->capture_default_str();
    app.add_option("--max-zero-intervals", cfg.quad.max_zero_intervals, "Tail interval limit")
        ->group(tol)
        ->capture_default_str();
    app.add_option("--tail-start", cfg.quad.tail_start, "Start of extrapolated tail")->group(tol)->capture_default_str();
    app.add_option("--conv-rel-tol", cfg.conv_rel_tol, "Relative tolerance of the load convolution")
        ->group(tol)
        ->capture_default_str();

    app.add_option("-o,--output", cfg.output, "Output file (default stdout)");
    app.add_option("--summary", cfg.summary, "Write a JSON run summary to this file");
    app.add_flag("--gnuplot", cfg.gnuplot, "Also write <output>.gp plotting the CSV");

    app.add_option("--seed", cfg.seed, "Seed for verify sampling")->capture_default_str();
    app.add_option("--samples", cfg.samples, "Number of verify samples")->capture_default_str();
    app.add_option("--csv", cfg.csv, "Per-sample verify residuals CSV");
    app.add_option("--corrupt-coefficient", cfg.corrupt, "Perturb A1 by this relative amount")->group("");

    app.add_option("--shape", cfg.shape, "Load shape for convolve")->capture_default_str();
    app.add_option("--radius", cfg.radius, "Load radius for convolve")->capture_default_str();
    app.add_option("--pressure", cfg.pressure, "Uniform pressure for convolve")->capture_default_str();

    for (const char* name : {"profile", "point", "sweep", "verify", "convolve"}) {
        static const std::map<std::string, std::string> help{
            {"profile", "Normalized surface profile u3_hat, ur_hat with classical columns (CSV)"},
            {"point", "Displacements at one physical radius (CSV)"},
            {"sweep", "u3_hat(0) over Poisson ratios with a least-squares line (CSV)"},
            {"verify", "Check the transform-domain solution at seeded random samples"},
            {"convolve", "Settlement under a uniform disc load (CSV)"}};
        app.add_subcommand(name, help.at(name))->callback([&cfg, name] { cfg.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : invalid_input;
    }
    if (cfg.nu_values.empty())
        cfg.nu_values = default_fit_grid();

    nlohmann::ordered_json summary;
    summary["config"] = cfg.to_json();
    try {
        detail::validate(cfg);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return invalid_input;
    }
    err << "config: " << summary["config"].dump() << '\n';

    std::ofstream file;
    if (!cfg.output.empty()) {
        file.open(cfg.output);
        if (!file) {
            err << "error: cannot write " << cfg.output << '\n';
            return invalid_input;
        }
    }
    std::ostream& sink = cfg.output.empty() ? out : file;

    int code = ok;
    nlohmann::ordered_json result;
    try {
        if (cfg.command == "profile")
            code = detail::run_profile(cfg, sink, result);
        else if (cfg.command == "point")
            code = detail::run_point(cfg, sink, result);
        else if (cfg.command == "sweep")
            code = detail::run_sweep(cfg, sink, result);
        else if (cfg.command == "verify")
            code = detail::run_verify(cfg, sink, result);
        else
            code = detail::run_convolve(cfg, sink, result);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        code = invalid_input;
    } catch (const QuadratureError& e) {
        err << "error: " << e.what() << '\n';
        code = quadrature_failure;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        code = quadrature_failure;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        code = invalid_input;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        code = invalid_input;
    }
    sink.flush();

    if (code == quadrature_failure)
        err << "error: quadrature did not converge; output kept with per-row flags\n";
    if (code == verification_failure)
        err << "error: verification failed\n";

    if (!cfg.summary.empty()) {
        summary["exit_code"] = code;
        summary["result"] = result;
        std::ofstream s(cfg.summary);
        if (!s) {
            err << "error: cannot write " << cfg.summary << '\n';
            return invalid_input;
        }
        s << summary.dump(2) << '\n';
    }
    return code;
}

} // namespace dipolar::cli
