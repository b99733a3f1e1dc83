/**
 * @file surface.hpp
 * @brief Surface displacements under a concentrated normal load.
 *
 * Normalized with r' = r / sqrt(c):
 *
 *   ur_hat(r') = (1-2nu) [K1(r') - 1/r'] + (1-nu) int_0^inf G(rho') rho' J1(rho' r') drho'
 *   u3_hat(r') = (pi (1-nu)/2) [I0(r') - L0(r')] - (1-nu) int_0^inf H(rho') rho' J0(rho' r') drho'
 *
 * with ur_hat(0) = 0. Physical values follow from dimensionalize(). For
 * r' >> 1 both approach the classical field -(1-2nu)/r' and (1-nu)/r'.
 */
#pragma once

#include "dipolar/kernels.hpp"
#include "dipolar/model.hpp"
#include "dipolar/quadrature.hpp"
#include "dipolar/specfun.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace dipolar {

namespace detail {

inline void require_admissible_nu(double nu)
{
    require_valid(Material{1.0, nu, 1.0});
}

inline void require_radius(double r_prime)
{
    if (!(r_prime >= 0.0) || !std::isfinite(r_prime))
        throw std::invalid_argument("r' must be finite and >= 0");
}

inline double checked(const QuadratureResult& q, const char* what)
{
    if (!q.converged)
        throw ConvergenceError(std::string(what) + ": quadrature did not converge");
    return q.value;
}

} // namespace detail

/// int_0^inf G(rho') rho' J1(rho' r') drho'.
inline QuadratureResult radial_gradient_integral(double r_prime, double nu, const QuadratureSpec& spec = {})
{
    return integrate_bessel([nu](double x) { return kernel_G(x, nu) * x; }, 1, r_prime, spec);
}

/// int_0^inf H(rho') rho' J0(rho' r') drho'.
inline QuadratureResult vertical_gradient_integral(double r_prime, double nu, const QuadratureSpec& spec = {})
{
    return integrate_bessel([nu](double x) { return kernel_H(x, nu) * x; }, 0, r_prime, spec);
}

namespace detail {

// closed + weight * integral, tightening the integral's tolerance when the
// sum cancels enough that its error no longer fits the tolerance of the total.
template <class Integral>
QuadratureResult combine(double closed, double weight, Integral&& integral, const QuadratureSpec& spec)
{
    QuadratureSpec inner = spec;
    QuadratureResult q;
    for (int attempt = 0;; ++attempt) {
        q = integral(inner);
        const double total = closed + weight * q.value;
        const double err = std::abs(weight) * q.err_est;
        const double tol = spec.tolerance(total);
        if (!q.converged || err <= tol || attempt == 3 || inner.rel_tol <= 1e-14) {
            q.value = total;
            q.err_est = err;
            q.converged = q.converged && err <= tol;
            return q;
        }
        const double shrink = std::max(0.5 * tol / err, 1e-3);
        inner.rel_tol = std::max(inner.rel_tol * shrink, 1e-14);
        inner.abs_tol *= shrink;
    }
}

} // namespace detail

/// u3_hat with the quadrature diagnostics of its integral term.
inline QuadratureResult u3_hat_result(double r_prime, double nu, const QuadratureSpec& spec = {})
{
    detail::require_admissible_nu(nu);
    detail::require_radius(r_prime);
    const double closed = 0.5 * std::numbers::pi * (1.0 - nu) * specfun::i0_minus_l0(r_prime);
    return detail::combine(closed, -(1.0 - nu),
                           [&](const QuadratureSpec& s) { return vertical_gradient_integral(r_prime, nu, s); }, spec);
}

/// ur_hat with the quadrature diagnostics of its integral term; exactly 0 at r' = 0.
inline QuadratureResult ur_hat_result(double r_prime, double nu, const QuadratureSpec& spec = {})
{
    detail::require_admissible_nu(nu);
    detail::require_radius(r_prime);
    if (r_prime == 0.0)
        return {0.0, 0.0, 0, true};
    const double closed = (1.0 - 2.0 * nu) * specfun::k1_minus_inverse(r_prime);
    return detail::combine(closed, 1.0 - nu,
                           [&](const QuadratureSpec& s) { return radial_gradient_integral(r_prime, nu, s); }, spec);
}

/// Normalized vertical surface displacement; throws ConvergenceError on quadrature failure.
inline double u3_hat(double r_prime, double nu, const QuadratureSpec& spec = {})
{
    return detail::checked(u3_hat_result(r_prime, nu, spec), "u3_hat");
}

/// Normalized radial surface displacement; throws ConvergenceError on quadrature failure.
inline double ur_hat(double r_prime, double nu, const QuadratureSpec& spec = {})
{
    return detail::checked(ur_hat_result(r_prime, nu, spec), "ur_hat");
}

/// Classical point-load surface field; u_theta vanishes by axisymmetry.
struct ClassicalSurface {
    double ur = 0.0;
    double utheta = 0.0;
    double u3 = 0.0;
};

inline ClassicalSurface classical_surface(double r, const Material& m, const PointLoad& load)
{
    require_valid(m);
    if (!(r > 0.0))
        throw std::domain_error("classical_surface: the classical field is singular at r = 0");
    const double k = load.P / (std::numbers::pi * m.mu * r);
    return {-0.25 * k * (1.0 - 2.0 * m.nu), 0.0, 0.5 * k * (1.0 - m.nu)};
}

/// -(1-2nu)/r'
inline double ur_classical_hat(double r_prime, double nu)
{
    if (!(r_prime > 0.0))
        throw std::domain_error("ur_classical_hat: singular at r' = 0");
    return -(1.0 - 2.0 * nu) / r_prime;
}

/// (1-nu)/r'
inline double u3_classical_hat(double r_prime, double nu)
{
    if (!(r_prime > 0.0))
        throw std::domain_error("u3_classical_hat: singular at r' = 0");
    return (1.0 - nu) / r_prime;
}

/// Physical surface displacement at distance r from the load.
inline SurfaceDisplacement surface_displacement(double r, const Material& m, const PointLoad& load,
                                                const QuadratureSpec& spec = {})
{
    require_valid(m);
    const double rp = normalize_radius(r, m.c);
    return dimensionalize(ur_hat(rp, m.nu, spec), u3_hat(rp, m.nu, spec), m, load);
}

/**
 * Six-term split of the normalized solution: classical part, closed-form
 * gradient part, and the gradient integral, for each component.
 *   I:  -(1-2nu)/r',  (1-2nu) K1(r'),  (1-nu) int G rho' J1
 *   II: (1-nu)/r',  -(1-nu)/r' + (pi(1-nu)/2)[I0 - L0](r'),  -(1-nu) int H rho' J0
 */
struct Decomposition {
    double I_class = 0.0, I_grad1 = 0.0, I_grad2 = 0.0;
    double II_class = 0.0, II_grad1 = 0.0, II_grad2 = 0.0;
    QuadratureResult quad_I, quad_II;

    double ur_hat() const { return I_class + I_grad1 + I_grad2; }
    double u3_hat() const { return II_class + II_grad1 + II_grad2; }
};

inline Decomposition decompose(double r_prime, double nu, const QuadratureSpec& spec = {})
{
    detail::require_admissible_nu(nu);
    if (!(r_prime > 0.0))
        throw std::domain_error("decompose: requires r' > 0");
    Decomposition d;
    d.quad_I = radial_gradient_integral(r_prime, nu, spec);
    d.quad_II = vertical_gradient_integral(r_prime, nu, spec);
    detail::checked(d.quad_I, "decompose");
    detail::checked(d.quad_II, "decompose");
    d.I_class = -(1.0 - 2.0 * nu) / r_prime;
    d.I_grad1 = (1.0 - 2.0 * nu) * specfun::bessel_k1(r_prime);
    d.I_grad2 = (1.0 - nu) * d.quad_I.value;
    d.II_class = (1.0 - nu) / r_prime;
    d.II_grad1 = -(1.0 - nu) / r_prime + 0.5 * std::numbers::pi * (1.0 - nu) * specfun::i0_minus_l0(r_prime);
    d.II_grad2 = -(1.0 - nu) * d.quad_II.value;
    return d;
}

/// Largest settlement u3_hat(0, nu), attained under the load.
inline double max_settlement(double nu, const QuadratureSpec& spec = {}) { return u3_hat(0.0, nu, spec); }

struct SettlementFit {
    double intercept = 0.0;
    double slope = 0.0;
    double max_residual = 0.0;
    std::vector<double> nu;
    std::vector<double> u3_origin;
};

/// Least-squares line through u3_hat(0, nu) over the given Poisson ratios.
inline SettlementFit settlement_fit(const std::vector<double>& nus, const QuadratureSpec& spec = {})
{
    if (nus.size() < 2)
        throw std::invalid_argument("settlement_fit: need at least two Poisson ratios");
    SettlementFit fit;
    fit.nu = nus;
    double sx = 0.0, sy = 0.0;
    for (double nu : nus) {
        const double v = max_settlement(nu, spec);
        fit.u3_origin.push_back(v);
        sx += nu;
        sy += v;
    }
    const double n = static_cast<double>(nus.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < nus.size(); ++i) {
        sxx += (nus[i] - mx) * (nus[i] - mx);
        sxy += (nus[i] - mx) * (fit.u3_origin[i] - my);
    }
    if (!(sxx > 0.0))
        throw std::invalid_argument("settlement_fit: Poisson ratios must not all coincide");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < nus.size(); ++i)
        fit.max_residual = std::max(fit.max_residual,
                                    std::abs(fit.u3_origin[i] - (fit.intercept + fit.slope * nus[i])));
    return fit;
}

/// nu = 0, 0.05, ..., 0.45.
inline std::vector<double> default_fit_grid()
{
    std::vector<double> g;
    for (int k = 0; k <= 9; ++k)
        g.push_back(k / 20.0);
    return g;
}

inline SettlementFit settlement_fit(const QuadratureSpec& spec = {}) { return settlement_fit(default_fit_grid(), spec); }

struct RadialPeak {
    double r_prime = 0.0;
    /// Signed ur_hat at the extremum of |ur_hat|.
    double value = 0.0;
};

/**
 * Extremum of |ur_hat| on (0, r_max]: a uniform scan with `scan_points`
 * points, then golden-section refinement on the bracketing cells.
 */
inline RadialPeak radial_peak(double nu, const QuadratureSpec& spec = {}, double r_max = 10.0, int scan_points = 100)
{
    detail::require_admissible_nu(nu);
    if (!(r_max > 0.0) || scan_points < 3)
        throw std::invalid_argument("radial_peak: need r_max > 0 and at least 3 scan points");
    auto mag = [&](double r) { return std::abs(ur_hat(r, nu, spec)); };
    const double h = r_max / scan_points;
    int best = 1;
    double best_val = -1.0;
    for (int i = 1; i <= scan_points; ++i) {
        const double v = mag(h * i);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = h * (best - 1), b = h * std::min(best + 1, scan_points);
    if (a == 0.0)
        a = 1e-3 * h;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = mag(x1), f2 = mag(x2);
    while (b - a > 1e-7 * (1.0 + std::abs(b))) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = mag(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = mag(x2);
        }
    }
    const double r = 0.5 * (a + b);
    return {r, ur_hat(r, nu, spec)};
}

/// Normalized surface profile; classical values are absent at r' = 0.
struct SurfaceProfile {
    double nu = 0.0;
    std::vector<double> r_prime;
    std::vector<double> u3_hat, ur_hat;
    std::vector<std::optional<double>> u3_class_hat, ur_class_hat;
    std::vector<QuadratureResult> quad_u3, quad_ur;

    bool converged() const
    {
        for (std::size_t i = 0; i < r_prime.size(); ++i)
            if (!quad_u3[i].converged || !quad_ur[i].converged)
                return false;
        return true;
    }
};

/// r' = 0 followed by n log-spaced points on [lo, hi].
inline std::vector<double> default_profile_grid(double lo = 1e-3, double hi = 20.0, int n = 200)
{
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        throw std::invalid_argument("default_profile_grid: need 0 < lo < hi and n >= 2");
    std::vector<double> g{0.0};
    const double ratio = std::log(hi / lo);
    for (int i = 0; i < n; ++i)
        g.push_back(i == n - 1 ? hi : lo * std::exp(ratio * i / (n - 1)));
    return g;
}

/// Evaluates the profile on a grid; non-convergence is recorded, not thrown.
inline SurfaceProfile surface_profile(const std::vector<double>& grid, double nu, const QuadratureSpec& spec = {})
{
    detail::require_admissible_nu(nu);
    SurfaceProfile prof;
    prof.nu = nu;
    for (double r : grid) {
        const QuadratureResult a = u3_hat_result(r, nu, spec);
        const QuadratureResult b = ur_hat_result(r, nu, spec);
        prof.r_prime.push_back(r);
        prof.u3_hat.push_back(a.value);
        prof.ur_hat.push_back(b.value);
        prof.quad_u3.push_back(a);
        prof.quad_ur.push_back(b);
        if (r > 0.0) {
            prof.u3_class_hat.emplace_back(u3_classical_hat(r, nu));
            prof.ur_class_hat.emplace_back(ur_classical_hat(r, nu));
        } else {
            prof.u3_class_hat.emplace_back(std::nullopt);
            prof.ur_class_hat.emplace_back(std::nullopt);
        }
    }
    return prof;
}

} // namespace dipolar
