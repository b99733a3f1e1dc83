// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "dipolar/dipolar.hpp"

#include "oracles.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using namespace dipolar;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool cond, const std::string& what)
    {
        if (!cond) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string capture(const std::string& args, int& status)
{
    const std::string cmd = std::string(DIPOLAR_CLI_PATH) + " " + args + " 2>/dev/null";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    std::string out;
    if (!pipe) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0)
        out.append(buf.data(), n);
    status = pclose(pipe.release());
    return out;
}

void settlement_fit_check(Outcome& o)
{
    double worst = 0.0;
    for (double nu : {0.0, 0.1, 0.2, 0.3, 0.4, 0.45}) {
        const double v = max_settlement(nu);
        const double d = rel(v, 1.286 - 1.166 * nu);
        worst = std::max(worst, d);
        o.check(d < 0.02, "u3_hat(0, " + std::to_string(nu) + ") off the line by more than 2%");
    }
    const auto fit = settlement_fit();
    o.detail << "max deviation from 1.286 - 1.166 nu " << worst << "; fit intercept " << fit.intercept << ", slope "
             << fit.slope;
    o.check(fit.intercept >= 1.26 && fit.intercept <= 1.31, "intercept outside [1.26, 1.31]");
    o.check(fit.slope >= -1.20 && fit.slope <= -1.13, "slope outside [-1.20, -1.13]");
}

void origin_check(Outcome& o)
{
    const auto u3 = u3_hat_result(0.0, 0.3);
    o.detail << "u3_hat(0, 0.3) = " << u3.value << " (err " << u3.err_est << ")";
    o.check(std::isfinite(u3.value) && u3.converged, "u3_hat(0) not finite or not converged");
    o.check(u3.err_est < 1e-6, "quadrature error >= 1e-6");
    for (double nu : {0.1, 0.3, 0.45})
        o.check(ur_hat(0.0, nu) == 0.0, "ur_hat(0) != 0 at nu = " + std::to_string(nu));
    o.detail << "; ur_hat(0) = 0 exactly for nu = 0.1, 0.3, 0.45";
}

void classical_limit_check(Outcome& o)
{
    const double nu = 0.3;
    double worst = 0.0;
    for (double r : {20.0, 50.0, 100.0}) {
        const double d3 = rel(u3_hat(r, nu), u3_classical_hat(r, nu));
        const double dr = rel(ur_hat(r, nu), ur_classical_hat(r, nu));
        worst = std::max({worst, d3, dr});
        o.check(d3 < 0.01 && dr < 0.01, "deviation >= 1% at r' = " + std::to_string(r));
    }
    o.detail << "max relative deviation " << worst;
}

void closed_form_check(Outcome& o)
{
    QuadratureSpec spec;
    spec.rel_tol = 1e-10;
    spec.abs_tol = 1e-15;
    double worst = 0.0;
    for (double r : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
        const oracle::hp x(r);
        const double k1 = static_cast<double>(oracle::bessel_k1(x));
        const double j0_ref = static_cast<double>(1 / x - oracle::hp_pi() / 2 * (oracle::bessel_i0(x) - oracle::struve_l0(x)));
        const auto a = integrate_bessel([](double t) { return t * t / (1.0 + t * t); }, 1, r, spec);
        const auto b = integrate_bessel([](double t) { return t * t / (1.0 + t * t); }, 0, r, spec);
        const double da = rel(a.value, k1), db = rel(b.value, j0_ref);
        worst = std::max({worst, da, db});
        o.check(da < 1e-6 && db < 1e-6, "mismatch at r' = " + std::to_string(r));
    }
    o.detail << "max relative error " << worst << " over 7 radii, J1 and J0";
}

void transform_check(Outcome& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = transform::verify_transform(Material{}, PointLoad{});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const transform::VerifyOptions opt;
    o.detail << rep.samples << " samples: max BC residual " << rep.max_bc << ", max ODE residual " << rep.max_ode
             << ", det root residual " << rep.max_det_root << ", min third-order " << rep.min_det_third << ", "
             << secs << " s";
    o.check(rep.max_bc < 1e-10, "BC residual");
    o.check(rep.max_ode < 1e-10, "ODE residual");
    o.check(rep.max_det_root < opt.det.root, "det does not vanish at the roots");
    o.check(rep.min_det_third > opt.det.third_order, "root multiplicity above 3");
    o.check(rep.pass, "per-sample checks");
    o.check(secs < 10.0, "runtime >= 10 s");
}

void specfun_check(Outcome& o)
{
    double worst = 0.0;
    std::string worst_name;
    auto track = [&](const char* name, double got, const oracle::hp& ref) {
        const double r = static_cast<double>(ref);
        const double e = std::abs(got - r) / std::max(1.0, std::abs(r));
        if (e > worst) {
            worst = e;
            worst_name = name;
        }
    };
    for (double x : oracle::logspace(1e-3, 50.0, 100)) {
        const oracle::hp X(x);
        track("J0", specfun::bessel_j(0, x), oracle::bessel_j(0, X));
        track("J1", specfun::bessel_j(1, x), oracle::bessel_j(1, X));
        track("I0", specfun::bessel_i0(x), oracle::bessel_i0(X));
        track("K1", specfun::bessel_k1(x), oracle::bessel_k1(X));
        track("L0", specfun::struve_l0(x), oracle::struve_l0(X));
    }
    o.check(worst <= 1e-10, "oracle agreement");

    // Small-argument behaviour with C = 1.
    double ck = 0.0, cl = 0.0, ci = 0.0;
    for (double x : oracle::logspace(1e-4, 0.1, 50)) {
        ck = std::max(ck, std::abs(specfun::bessel_k1(x) - 1.0 / x) / (x * std::abs(std::log(x))));
        cl = std::max(cl, std::abs(specfun::struve_l0(x) - 2.0 * x / std::numbers::pi) / (x * x * x));
        ci = std::max(ci, std::abs(specfun::bessel_i0(x) - 1.0) / (x * x));
    }
    o.check(ck <= 1.0 && cl <= 1.0 && ci <= 1.0, "small-argument bounds");
    o.detail << "max scaled error " << worst << " (" << worst_name << ") at 100 points in (0, 50]"
             << "; small-x constants K1 " << ck << ", L0 " << cl << ", I0 " << ci;
}

void radial_peak_check(Outcome& o)
{
    for (double nu : {0.1, 0.3, 0.45}) {
        const auto pk = radial_peak(nu);
        o.detail << (nu == 0.1 ? "" : "; ") << "nu " << nu << ": r' " << pk.r_prime << ", ur_hat " << pk.value;
        o.check(std::isfinite(pk.value), "peak value not finite");
        if (nu == 0.3)
            o.check(pk.r_prime >= 1.0 && pk.r_prime <= 3.0, "nu = 0.3 peak outside [1, 3]");
    }
}

void superposition_check(Outcome& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const Material m{1.0, 0.3, 1.0};
    const KernelTable table(m.nu, 102.0);
    const double p = 1.0, a0 = 100.0;
    const auto wide = settlement_profile(uniform_disc(p, a0), m, {0.0}, table);
    const double classical = (1.0 - m.nu) * p * a0 / m.mu;
    const double d_wide = rel(wide.u3[0], classical);
    o.check(wide.converged && d_wide < 0.02, "wide disc center");

    const std::vector<double> radii{10.0, 15.0, 20.0, 30.0, 50.0, 100.0};
    const auto narrow = settlement_profile(uniform_disc_resultant(1.0, 0.01), m, radii, table);
    double worst = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double point = u3_hat(radii[i], m.nu) / (2.0 * std::numbers::pi * m.mu * m.ell());
        worst = std::max(worst, rel(narrow.u3[i], point));
    }
    o.check(narrow.converged && worst < 0.01, "narrow disc vs point load");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(secs < 60.0, "runtime >= 60 s");
    o.detail << "a0 = 100: center / classical - 1 = " << wide.u3[0] / classical - 1.0
             << "; a0 = 0.01 vs point load for r in [10, 100]: max rel " << worst << "; " << secs << " s";
}

void determinism_check(Outcome& o)
{
    const std::vector<std::string> runs{"profile --n-points 40", "sweep", "verify --seed 4242 --samples 50",
                                        "point --r 1.5 --c 2", "convolve --n-points 5 --r-max 2"};
    for (const auto& args : runs) {
        int s1 = 0, s2 = 0;
        const std::string a = capture(args, s1), b = capture(args, s2);
        o.check(s1 == 0 && s2 == 0, "'" + args + "' exited nonzero");
        o.check(!a.empty() && a == b, "'" + args + "' output differs between runs");
    }
    o.detail << runs.size() << " commands run twice, outputs compared byte for byte";
}

} // namespace

int main()
{
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"settlement fit", settlement_fit_check},
        {"bounded settlement, zero radial displacement at origin", origin_check},
        {"classical limit", classical_limit_check},
        {"closed forms vs quadrature", closed_form_check},
        {"transform-domain certification", transform_check},
        {"special functions", specfun_check},
        {"radial displacement peak", radial_peak_check},
        {"superposition oracles", superposition_check},
        {"determinism", determinism_check},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.str().c_str());
    }
    std::printf("%s: %d of %zu criteria failed\n", failures ? "FAIL" : "PASS", failures, criteria.size());
    return failures ? 1 : 0;
}
