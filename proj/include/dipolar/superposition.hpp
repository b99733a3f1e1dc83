/**
 * @file superposition.hpp
 * @brief Settlement under axisymmetric surface pressure by superposing the
 *        point-load solution.
 *
 *   u3(r) = int_0^a0 int_0^2pi g3(d) p(r0) r0 dphi dr0,
 *   d^2   = r^2 + r0^2 - 2 r r0 cos(phi),
 *   g3(d) = u3_hat(d / sqrt(c)) / (2 pi mu sqrt(c)).
 *
 * g3 is bounded at d = 0, so the integrand has only a kink where d vanishes;
 * the r0 range is split at r0 = r and phi is folded onto [0, pi].
 */
#pragma once

#include "dipolar/model.hpp"
#include "dipolar/quadrature.hpp"
#include "dipolar/surface.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace dipolar {

/**
 * Cubic B-spline of u3_hat in log r' on [r_min, r_max], the exact value at
 * r' = 0, and linear interpolation on [0, r_min].
 */
class KernelTable {
public:
    KernelTable(double nu, double r_max = 50.0, const QuadratureSpec& spec = {}, int nodes = 400, double r_min = 1e-3)
        : nu_(nu), r_min_(r_min), r_max_(r_max)
    {
        if (!(r_min > 0.0) || !(r_max > r_min) || nodes < 4)
            throw std::invalid_argument("KernelTable: need 0 < r_min < r_max and at least 4 nodes");
        u0_ = u3_hat(0.0, nu, spec);
        log_min_ = std::log(r_min);
        log_max_ = std::log(r_max);
        step_ = (log_max_ - log_min_) / (nodes - 1);
        u_min_ = u3_hat(r_min, nu, spec);
        // Two nodes of padding past each end, plus two more that only feed
        // the centered end slopes.
        constexpr int pad = 2, ext = pad + 2;
        std::vector<double> all;
        all.reserve(nodes + 2 * ext);
        for (int i = -ext; i < nodes + ext; ++i)
            all.push_back(i == 0 ? u_min_ : u3_hat(std::exp(log_min_ + step_ * i), nu, spec));
        auto slope = [&](std::size_t k) {
            return (all[k - 2] - 8.0 * all[k - 1] + 8.0 * all[k + 1] - all[k + 2]) / (12.0 * step_);
        };
        const std::size_t first = 2, last = all.size() - 3;
        spline_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(
            all.data() + first, last - first + 1, log_min_ - pad * step_, step_, slope(first), slope(last));
    }

    double operator()(double r_prime) const
    {
        if (r_prime <= r_min_)
            return u0_ + (u_min_ - u0_) * (r_prime / r_min_);
        if (r_prime <= r_max_)
            return spline_(std::min(std::log(r_prime), log_max_));
        throw std::domain_error("KernelTable: r' beyond the tabulated range");
    }

    double nu() const { return nu_; }
    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }

private:
    double nu_, r_min_, r_max_;
    double u0_ = 0.0, u_min_ = 0.0;
    double log_min_ = 0.0, log_max_ = 0.0, step_ = 0.0;
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline_;
};

/// Pressure p(r0) [force / length^2] supported on r0 <= radius.
struct AxisymmetricLoad {
    std::function<double(double)> pressure;
    double radius = 1.0;

    /// Resultant force 2 pi int_0^radius p(r0) r0 dr0.
    double resultant(const QuadratureSpec& spec = {}) const
    {
        check();
        const auto res = integrate_adaptive([this](double r0) { return pressure(r0) * r0; }, 0.0, radius, spec);
        return 2.0 * std::numbers::pi * res.value;
    }

    void check() const
    {
        if (!pressure)
            throw std::invalid_argument("AxisymmetricLoad: pressure profile missing");
        if (!(radius > 0.0) || !std::isfinite(radius))
            throw std::invalid_argument("AxisymmetricLoad: radius must be positive");
    }
};

inline AxisymmetricLoad uniform_disc(double pressure, double radius)
{
    return {[pressure](double) { return pressure; }, radius};
}

/// Uniform disc carrying total force P.
inline AxisymmetricLoad uniform_disc_resultant(double P, double radius)
{
    return uniform_disc(P / (std::numbers::pi * radius * radius), radius);
}

struct SettlementProfile {
    std::vector<double> r;
    std::vector<double> u3;
    std::vector<double> err_est;
    bool converged = true;
};

struct ConvolutionSpec {
    /// Relative tolerance of the nested (r0, phi) quadrature.
    double rel_tol = 1e-7;
    int max_panels = 2000;
    /// Quadrature settings for building the kernel table.
    QuadratureSpec kernel{};
    int table_nodes = 400;
};

/// Settlement u3 at the given radii using a prebuilt kernel table.
inline SettlementProfile settlement_profile(const AxisymmetricLoad& load, const Material& m,
                                            const std::vector<double>& radii, const KernelTable& table,
                                            const ConvolutionSpec& cs = {})
{
    require_valid(m);
    load.check();
    if (table.nu() != m.nu)
        throw std::invalid_argument("settlement_profile: kernel table built for a different Poisson ratio");
    const double ell = m.ell();
    for (double r : radii)
        if ((r + load.radius) / ell > table.r_max())
            throw std::invalid_argument("settlement_profile: kernel table does not cover r + radius");
    const double g_scale = 1.0 / (2.0 * std::numbers::pi * m.mu * ell);
    QuadratureSpec qs;
    qs.rel_tol = cs.rel_tol;
    qs.abs_tol = 1e-300;
    qs.max_panels = cs.max_panels;

    SettlementProfile out;
    for (double r : radii) {
        if (!(r >= 0.0))
            throw std::invalid_argument("settlement_profile: radii must be >= 0");
        double err_sum = 0.0;
        bool ok = true;
        // 2 int_0^pi g3(d) dphi
        auto ring = [&](double r0) {
            if (r == 0.0 || r0 == 0.0)
                return 2.0 * std::numbers::pi * table(std::max(r, r0) / ell);
            auto g = [&](double phi) {
                const double d2 = (r - r0) * (r - r0) + 2.0 * r * r0 * (1.0 - std::cos(phi));
                return table(std::sqrt(std::max(d2, 0.0)) / ell);
            };
            const auto inner = integrate_adaptive(g, 0.0, std::numbers::pi, qs);
            ok = ok && inner.converged;
            return 2.0 * inner.value;
        };
        auto integrand = [&](double r0) { return ring(r0) * load.pressure(r0) * r0; };
        double value = 0.0;
        const double a = load.radius;
        const double split = std::min(r, a);
        for (auto [lo, hi] : {std::pair{0.0, split}, std::pair{split, a}}) {
            if (!(hi > lo))
                continue;
            const auto part = integrate_adaptive(integrand, lo, hi, qs);
            value += part.value;
            err_sum += part.err_est;
            ok = ok && part.converged;
        }
        out.r.push_back(r);
        out.u3.push_back(g_scale * value);
        out.err_est.push_back(g_scale * err_sum);
        out.converged = out.converged && ok;
    }
    return out;
}

/// Builds a kernel table covering every distance needed, then convolves.
inline SettlementProfile settlement_profile(const AxisymmetricLoad& load, const Material& m,
                                            const std::vector<double>& radii, const ConvolutionSpec& cs = {})
{
    require_valid(m);
    load.check();
    double far = load.radius;
    for (double r : radii)
        if (r >= 0.0)
            far = std::max(far, r + load.radius);
    const KernelTable table(m.nu, std::max(50.0, 1.01 * far / m.ell()), cs.kernel, cs.table_nodes);
    return settlement_profile(load, m, radii, table, cs);
}

} // namespace dipolar
