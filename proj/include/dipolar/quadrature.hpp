/**
 * @file quadrature.hpp
 * @brief Adaptive quadrature on finite intervals and semi-infinite Bessel
 *        integrals  int_0^inf f(x) J_n(x r) dx  for smooth, algebraically
 *        decaying f.
 *
 * The Bessel integrator splits [0, inf) at the zeros j_{n,k} / r. The head
 * [0, tail_start] is summed interval by interval; beyond it the partial sums
 * form an oscillating sequence whose limit is extrapolated with Sidi's mW
 * transformation
 *
 *   M_0^(s) = F(x_s) / psi(x_s),  N_0^(s) = 1 / psi(x_s),
 *   M_p^(s) = (M_{p-1}^(s) - M_{p-1}^(s+1)) / (1/x_s - 1/x_{s+p}),   (same for N)
 *   W_p^(0) = M_p^(0) / N_p^(0),
 *
 * with F(x_s) the integral up to the s-th tail zero and psi(x_s) the integral
 * over the following interval.
 */
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace dipolar {

enum class TailAcceleration { none, extrapolate };

struct QuadratureSpec {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    /// Limit on zero intervals past tail_start.
    int max_zero_intervals = 200;
    TailAcceleration tail_accel = TailAcceleration::extrapolate;
    /// Head/tail split in the integration variable (normalized units: O(1) features).
    double tail_start = 10.0;
    /// Panel limit for integrate_adaptive.
    int max_panels = 2000;

    void check() const
    {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
        if (max_zero_intervals < 8)
            throw std::invalid_argument("QuadratureSpec: max_zero_intervals must be >= 8");
        if (!(tail_start > 0.0))
            throw std::invalid_argument("QuadratureSpec: tail_start must be positive");
        if (max_panels < 1)
            throw std::invalid_argument("QuadratureSpec: max_panels must be >= 1");
    }

    double tolerance(double value) const { return std::max(rel_tol * std::abs(value), abs_tol); }
};

struct QuadratureResult {
    double value = 0.0;
    double err_est = 0.0;
    int intervals_used = 0;
    bool converged = true;
};

/// Raised when the integrand produces a non-finite value.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by value-returning callers when an integral misses its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

struct Panel {
    double a, b, value, err;
};

struct PanelOrder {
    bool operator()(const Panel& x, const Panel& y) const { return x.err < y.err; }
};

template <class F>
Panel kronrod_panel(F& f, double a, double b)
{
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 0, 0.0, &err);
    if (!std::isfinite(v) || !std::isfinite(err))
        throw QuadratureError("integrand returned a non-finite value");
    return {a, b, v, err};
}

// Tight settings for the subintervals of the Bessel integrator.
inline QuadratureSpec interval_spec(const QuadratureSpec& spec)
{
    QuadratureSpec s = spec;
    s.rel_tol = std::min(1e-13, 1e-3 * spec.rel_tol);
    s.abs_tol = 1e-3 * spec.abs_tol;
    return s;
}

} // namespace detail

/// Globally adaptive 21-point Gauss-Kronrod quadrature of f over [a, b].
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, const QuadratureSpec& spec)
{
    spec.check();
    if (!(a < b))
        throw std::invalid_argument("integrate_adaptive: requires a < b");

    std::priority_queue<detail::Panel, std::vector<detail::Panel>, detail::PanelOrder> panels;
    panels.push(detail::kronrod_panel(f, a, b));
    double value = panels.top().value;
    double err = panels.top().err;
    int count = 1;

    while (err > spec.tolerance(value) && count < spec.max_panels) {
        const detail::Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            panels.push(worst);
            break;
        }
        const detail::Panel left = detail::kronrod_panel(f, worst.a, mid);
        const detail::Panel right = detail::kronrod_panel(f, mid, worst.b);
        panels.push(left);
        panels.push(right);
        ++count;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
    }

    // Re-sum from the panels so the result carries no update drift.
    value = 0.0;
    err = 0.0;
    while (!panels.empty()) {
        value += panels.top().value;
        err += panels.top().err;
        panels.pop();
    }
    return {value, err, count, err <= spec.tolerance(value)};
}

/**
 * int_0^inf f(x) J_order(x r) dx for order in {0, 1} and r >= 0.
 *
 * f must be continuous on [0, inf). For r > 0 it may tend to a constant
 * (conditionally convergent case); for r = 0 and order 0 it must decay
 * faster than 1/x. With r = 0 the order-1 integral is exactly zero and the
 * order-0 tail beyond tail_start is mapped to (0, 1/tail_start] by x = 1/t.
 *
 * Non-convergence within max_zero_intervals returns the best estimate with
 * converged = false; a non-finite integrand value raises QuadratureError.
 */
template <class F>
QuadratureResult integrate_bessel(F&& f, int order, double r, const QuadratureSpec& spec)
{
    spec.check();
    if (order != 0 && order != 1)
        throw std::invalid_argument("integrate_bessel: order must be 0 or 1");
    if (!(r >= 0.0))
        throw std::invalid_argument("integrate_bessel: r must be >= 0");

    const QuadratureSpec sub = detail::interval_spec(spec);

    if (r == 0.0) {
        if (order == 1)
            return {0.0, 0.0, 0, true};
        const double T = spec.tail_start;
        const QuadratureResult head = integrate_adaptive(f, 0.0, T, sub);
        auto mapped = [&f](double t) {
            const double x = 1.0 / t;
            return f(x) * x * x;
        };
        const QuadratureResult tail = integrate_adaptive(mapped, 0.0, 1.0 / T, sub);
        const double value = head.value + tail.value;
        const double err = head.err_est + tail.err_est;
        return {value, err, head.intervals_used + tail.intervals_used, err <= spec.tolerance(value)};
    }

    auto g = [&f, order, r](double x) { return f(x) * boost::math::cyl_bessel_j(order, x * r); };
    const double nu_order = static_cast<double>(order);
    int zero_index = 0;
    auto next_zero = [&]() { return boost::math::cyl_bessel_j_zero(nu_order, ++zero_index) / r; };

    int intervals = 0;
    double quad_err = 0.0;
    bool intervals_ok = true;
    auto integrate_piece = [&](double a, double b) {
        const QuadratureResult piece = integrate_adaptive(g, a, b, sub);
        ++intervals;
        quad_err += piece.err_est;
        intervals_ok = intervals_ok && piece.converged;
        return piece.value;
    };

    // Head: up to the first zero at or beyond tail_start.
    double x = 0.0;
    double partial = 0.0;
    while (x < spec.tail_start) {
        const double z = next_zero();
        partial += integrate_piece(x, z);
        x = z;
    }

    if (spec.tail_accel == TailAcceleration::none) {
        double last_term = std::abs(partial);
        int used = 0;
        while (used < spec.max_zero_intervals) {
            const double z = next_zero();
            const double psi = integrate_piece(x, z);
            partial += psi;
            x = z;
            ++used;
            last_term = std::abs(psi);
            if (last_term <= spec.tolerance(partial))
                break;
        }
        const double err = last_term + quad_err;
        return {partial, err, intervals, intervals_ok && err <= spec.tolerance(partial)};
    }

    std::vector<double> xs, M, N;
    double z = next_zero();
    double psi = integrate_piece(x, z);
    double W = partial, W_prev = partial;
    double diff = 0.0, diff_prev = 0.0;
    bool have_prev = false;

    for (int s = 0; s < spec.max_zero_intervals; ++s) {
        if (psi == 0.0)
            break;
        xs.push_back(x);
        M.push_back(partial / psi);
        N.push_back(1.0 / psi);
        for (int j = s - 1; j >= 0; --j) {
            const double denom = 1.0 / xs[j] - 1.0 / xs[s];
            M[j] = (M[j] - M[j + 1]) / denom;
            N[j] = (N[j] - N[j + 1]) / denom;
        }
        const double W_new = M[0] / N[0];
        if (!std::isfinite(W_new))
            break;
        W_prev = W;
        W = W_new;
        diff_prev = diff;
        diff = std::abs(W - W_prev);

        if (have_prev && s >= 3 && diff <= spec.tolerance(W) && diff_prev <= spec.tolerance(W)) {
            const double err = std::max(diff, diff_prev) + quad_err;
            return {W, err, intervals, intervals_ok && err <= spec.tolerance(W)};
        }
        have_prev = true;

        partial += psi;
        x = z;
        z = next_zero();
        psi = integrate_piece(x, z);
    }
    return {W, std::max(diff, diff_prev) + quad_err, intervals, false};
}

} // namespace dipolar
