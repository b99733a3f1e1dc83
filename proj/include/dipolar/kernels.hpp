/**
 * @file kernels.hpp
 * @brief Dimensionless spectral functions of the surface solution and the
 *        dimensional spectral amplitudes F1, F2 kept for cross-validation.
 *
 * Notation: rho' is the normalized spectral variable, gamma' = sqrt(1 + rho'^2).
 *
 *   Lambda(rho') = 4 (rho' gamma')^3 - (1 + 2 rho'^2) (2 (rho' gamma')^2 - nu + 1)
 *   G(rho')      = rho' [4 gamma'^2 rho' (gamma' - rho') - 2 rho'^2 - 3 + 2 nu] / ((1 + rho'^2) Lambda)
 *   H(rho')      = rho' [(1 + 2 rho'^2 - 2 gamma' rho') gamma' rho' - 1 + nu]  / ((1 + rho'^2) Lambda)
 *
 * Written this way every bracket cancels its leading powers of rho' for large
 * rho' (Lambda loses its rho'^6 and rho'^4 terms). The production routines use
 * the equivalent rationalized forms built on gamma' - rho' = 1 / (gamma' + rho'):
 *
 *   Lambda = -2 rho'^2 gamma'^2 / (gamma' + rho')^2 - (1 + 2 rho'^2)(1 - nu)
 *   4 gamma'^2 rho' (gamma' - rho') - 2 rho'^2 = 4 rho' / (gamma' + rho') - 2 rho'^2 / (gamma' + rho')^2
 *   1 + 2 rho'^2 - 2 gamma' rho'             = 1 / (gamma' + rho')^2
 *
 * The first line shows Lambda < 0 for every nu < 1, so G and H have no poles
 * for admissible materials. The *_direct variants evaluate the expressions
 * exactly as written above and serve as the independent arithmetic path.
 */
#pragma once

#include "dipolar/model.hpp"

#include <cmath>
#include <stdexcept>

namespace dipolar {

/// gamma' = sqrt(1 + rho'^2).
inline double gamma_prime(double rho_p)
{
    if (!(rho_p >= 0.0))
        throw std::domain_error("gamma_prime: rho' must be >= 0");
    return std::hypot(1.0, rho_p);
}

/// gamma' - rho', by direct subtraction for rho' <= 1 and rationalized beyond.
inline double gamma_minus_rho(double rho_p)
{
    const double g = gamma_prime(rho_p);
    if (rho_p <= 1.0)
        return g - rho_p;
    return 1.0 / (g + rho_p);
}

/// Lambda(rho'), cancellation-free form.
inline double lambda_cap(double rho_p, double nu)
{
    const double g = gamma_prime(rho_p);
    const double s = rho_p * g / (g + rho_p);
    return -2.0 * s * s - (1.0 + 2.0 * rho_p * rho_p) * (1.0 - nu);
}

/// Lambda(rho') as the literal polynomial-in-(rho' gamma') expression.
inline double lambda_cap_direct(double rho_p, double nu)
{
    const double g = gamma_prime(rho_p);
    const double rg = rho_p * g;
    return 4.0 * rg * rg * rg - (1.0 + 2.0 * rho_p * rho_p) * (2.0 * rg * rg - nu + 1.0);
}

struct SpectralPoint {
    double rho_p = 0.0;
    double gamma_p = 1.0;
    double lambda_cap = 0.0;
};

inline SpectralPoint spectral_point(double rho_p, double nu)
{
    return {rho_p, gamma_prime(rho_p), lambda_cap(rho_p, nu)};
}

namespace detail {

inline double checked_lambda(double rho_p, double nu)
{
    const double lam = lambda_cap(rho_p, nu);
    if (lam == 0.0 || !std::isfinite(lam))
        throw std::domain_error("spectral kernel: Lambda vanishes (inadmissible Poisson ratio)");
    return lam;
}

} // namespace detail

/// Radial spectral kernel G(rho'); O(rho') at the origin, O(rho'^-3) at infinity.
inline double kernel_G(double rho_p, double nu)
{
    const double g = gamma_prime(rho_p);
    const double inv = 1.0 / (g + rho_p);
    const double bracket = 4.0 * rho_p * inv - 2.0 * rho_p * rho_p * inv * inv - 3.0 + 2.0 * nu;
    return rho_p * bracket / ((1.0 + rho_p * rho_p) * detail::checked_lambda(rho_p, nu));
}

/// Vertical spectral kernel H(rho'); O(rho') at the origin, O(rho'^-3) at infinity.
inline double kernel_H(double rho_p, double nu)
{
    const double g = gamma_prime(rho_p);
    const double inv = 1.0 / (g + rho_p);
    const double bracket = g * rho_p * inv * inv - 1.0 + nu;
    return rho_p * bracket / ((1.0 + rho_p * rho_p) * detail::checked_lambda(rho_p, nu));
}

inline double kernel_G_direct(double rho_p, double nu)
{
    const double g = gamma_prime(rho_p);
    const double bracket = 4.0 * g * g * rho_p * (g - rho_p) - 2.0 * rho_p * rho_p - 3.0 + 2.0 * nu;
    return rho_p * bracket / ((1.0 + rho_p * rho_p) * lambda_cap_direct(rho_p, nu));
}

inline double kernel_H_direct(double rho_p, double nu)
{
    const double g = gamma_prime(rho_p);
    const double bracket = (1.0 + 2.0 * rho_p * rho_p - 2.0 * g * rho_p) * g * rho_p - 1.0 + nu;
    return rho_p * bracket / ((1.0 + rho_p * rho_p) * lambda_cap_direct(rho_p, nu));
}

/// Spectral amplitudes of the surface displacement transforms:
/// u1* = i F1 cos(phi), u2* = i F1 sin(phi), u3* = F2 on the inversion contour.
struct SpectralAmplitudes {
    double F1 = 0.0;
    double F2 = 0.0;
};

/**
 * F1(rho), F2(rho) in physical units, evaluated term by term with
 * beta = rho and gamma = sqrt(1/c + rho^2). Both carry the classical 1/rho
 * pole, so rho = 0 is a domain error. Not used by the production integrals.
 */
inline SpectralAmplitudes spectral_amplitudes_F(double rho, const Material& m, const PointLoad& load)
{
    require_valid(m);
    if (!(rho > 0.0))
        throw std::domain_error("spectral_amplitudes_F: rho must be > 0 (classical pole)");
    const double c = m.c, nu = m.nu, mu = m.mu, P = load.P;
    const double gam = std::sqrt(1.0 / c + rho * rho);
    const double cbg = c * rho * gam;
    const double N = 4.0 * cbg * cbg * cbg - (1.0 + 2.0 * c * rho * rho) * (2.0 * cbg * cbg - nu + 1.0);
    const double one_c = 1.0 + c * rho * rho;

    const double F1 = -P * (1.0 - 2.0 * nu) / (2.0 * mu * rho)
                      + P * c * rho * (1.0 - 2.0 * nu) / (2.0 * mu * one_c)
                      + P * c * (1.0 - nu) * rho
                            * (4.0 * c * c * gam * gam * rho * (gam - rho) - 2.0 * c * rho * rho - 3.0 + 2.0 * nu)
                            / (2.0 * mu * one_c * N);
    const double F2 = P * (1.0 - nu) / (mu * rho)
                      - P * (1.0 - nu) * c * rho / (mu * one_c)
                      - P * c * (1.0 - nu) * rho
                            * (c * (1.0 + 2.0 * c * rho * rho - 2.0 * c * rho * gam) * gam * rho - 1.0 + nu)
                            / (mu * one_c * N);
    return {F1, F2};
}

} // namespace dipolar
