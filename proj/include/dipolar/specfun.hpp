/**
 * @file specfun.hpp
 * @brief Real-argument special functions used by the surface solution:
 *        J0, J1, I0, K1, the modified Struve function L0, the combination
 *        I0 - L0 and positive zeros of J0 / J1.
 *
 * J_n, I0, K1 and the Bessel zeros come from Boost.Math. The Struve pieces
 * are evaluated here because I0 - L0 needs a path that never forms the two
 * exponentially large parts separately.
 */
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dipolar::specfun {

namespace detail {

inline void require_order(int order)
{
    if (order != 0 && order != 1)
        throw std::invalid_argument("only orders 0 and 1 are supported");
}

inline void require_nonnegative(double x, const char* what)
{
    if (!(x >= 0.0))
        throw std::domain_error(std::string(what) + ": argument must be >= 0");
}

// Above this argument I0 - L0 uses its large-x asymptotic series.
inline constexpr double struve_asymptotic_switch = 30.0;

// Ascending series of L0; every term is positive.
inline double struve_l0_series(double x)
{
    const double h2 = 0.25 * x * x;
    double term = 2.0 * x / std::numbers::pi;
    double sum = term;
    for (int k = 0; k < 500; ++k) {
        const double a = k + 1.5;
        term *= h2 / (a * a);
        sum += term;
        if (term <= std::numeric_limits<double>::epsilon() * sum)
            break;
    }
    return sum;
}

// I0(x) - L0(x) ~ (1/pi^2) sum_k Gamma(k+1/2)^2 (2/x)^(2k+1), truncated at the
// smallest term.
inline double i0_minus_l0_asymptotic(double x)
{
    const double t = 2.0 / x;
    double term = t / std::numbers::pi;
    double sum = term;
    for (int k = 0; k < 200; ++k) {
        const double a = k + 0.5;
        const double next = term * a * a * t * t;
        if (next >= term)
            break;
        term = next;
        sum += term;
        if (term <= std::numeric_limits<double>::epsilon() * sum)
            break;
    }
    return sum;
}

// I0(x) - L0(x) = (2/pi) int_0^{pi/2} exp(-x sin t) dt.
inline double i0_minus_l0_integral(double x)
{
    using boost::math::quadrature::gauss_kronrod;
    auto f = [x](double t) { return std::exp(-x * std::sin(t)); };
    double err = 0.0;
    // The Kronrod error estimate is pessimistic here; 1e-13 already lands at
    // rounding level, while 1e-15 recurses to the depth limit for x > 8.
    const double v = gauss_kronrod<double, 31>::integrate(f, 0.0, 0.5 * std::numbers::pi, 15,
                                                          1e-13, &err);
    return 2.0 * v / std::numbers::pi;
}

} // namespace detail

/// Bessel function of the first kind J_n(x), n in {0, 1}, x >= 0.
inline double bessel_j(int order, double x)
{
    detail::require_order(order);
    detail::require_nonnegative(x, "bessel_j");
    return boost::math::cyl_bessel_j(order, x);
}

inline double bessel_i0(double x)
{
    detail::require_nonnegative(x, "bessel_i0");
    return boost::math::cyl_bessel_i(0, x);
}

/// K1 has a simple pole at the origin; x = 0 is a domain error.
inline double bessel_k1(double x)
{
    detail::require_nonnegative(x, "bessel_k1");
    if (x == 0.0)
        throw std::domain_error("bessel_k1: pole at x = 0");
    return boost::math::cyl_bessel_k(1, x);
}

/**
 * K1(x) - 1/x without cancellation near the origin.
 *
 * For x <= 1 the ascending expansion
 *   K1(x) = 1/x + ln(x/2) I1(x) - (x/4) sum_k [psi(k+1) + psi(k+2)] (x^2/4)^k / (k! (k+1)!)
 * is summed with the 1/x term removed. The difference behaves like
 * (x/2) ln(x/2) and vanishes at x = 0.
 */
inline double k1_minus_inverse(double x)
{
    detail::require_nonnegative(x, "k1_minus_inverse");
    if (x == 0.0)
        return 0.0;
    if (x > 1.0)
        return boost::math::cyl_bessel_k(1, x) - 1.0 / x;

    constexpr double euler_gamma = std::numbers::egamma;
    const double h2 = 0.25 * x * x;
    // psi(k+1) = -gamma + H_k
    double harmonic = 0.0;
    double pow_fact = 1.0; // (x^2/4)^k / (k! (k+1)!)
    double series = 0.0;
    for (int k = 0; k < 60; ++k) {
        const double psi_sum = (-euler_gamma + harmonic) + (-euler_gamma + harmonic + 1.0 / (k + 1));
        const double term = psi_sum * pow_fact;
        series += term;
        if (k > 2 && std::abs(term) <= 1e-18 * std::abs(series))
            break;
        harmonic += 1.0 / (k + 1);
        pow_fact *= h2 / ((k + 1.0) * (k + 2.0));
    }
    return std::log(0.5 * x) * boost::math::cyl_bessel_i(1, x) - 0.25 * x * series;
}

/// Difference I0(x) - L0(x), accurate for all x >= 0 (decays like 2/(pi x)).
inline double i0_minus_l0(double x)
{
    detail::require_nonnegative(x, "i0_minus_l0");
    if (x == 0.0)
        return 1.0;
    if (x >= detail::struve_asymptotic_switch)
        return detail::i0_minus_l0_asymptotic(x);
    return detail::i0_minus_l0_integral(x);
}

/// Modified Struve function L0(x).
inline double struve_l0(double x)
{
    detail::require_nonnegative(x, "struve_l0");
    if (x <= detail::struve_asymptotic_switch)
        return detail::struve_l0_series(x);
    return boost::math::cyl_bessel_i(0, x) - detail::i0_minus_l0_asymptotic(x);
}

/// k-th positive zero of J_order, k >= 1.
inline double bessel_zero(int order, int k)
{
    detail::require_order(order);
    if (k < 1)
        throw std::invalid_argument("bessel_zero: k must be >= 1");
    return boost::math::cyl_bessel_j_zero(static_cast<double>(order), k);
}

} // namespace dipolar::specfun
