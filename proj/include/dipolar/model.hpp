/**
 * @file model.hpp
 * @brief Material constants of dipolar gradient elasticity, admissibility
 *        checks, and the normalization layer between physical and
 *        dimensionless quantities.
 *
 * Everything below the I/O boundary works on normalized quantities:
 * distances are measured in units of the intrinsic length ell = sqrt(c) and
 * displacements in units of P / (mu sqrt(c)).
 */
#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace dipolar {

/// Largest admissible Poisson ratio; lambda = 2 mu nu / (1 - 2 nu) diverges at 0.5.
inline constexpr double max_poisson_ratio = 0.5 - 1e-6;

/**
 * Isotropic dipolar gradient material with a single gradient coefficient.
 *
 * mu  shear modulus [force / length^2]
 * nu  Poisson ratio [-]
 * c   gradient coefficient [length^2]
 */
struct Material {
    double mu = 1.0;
    double nu = 0.3;
    double c = 1.0;

    /// Intrinsic material length sqrt(c).
    double ell() const { return std::sqrt(c); }

    /// Lame constant lambda.
    double lambda() const { return 2.0 * mu * nu / (1.0 - 2.0 * nu); }
};

/// Concentrated normal load at the origin; positive P presses into the half-space.
struct PointLoad {
    double P = 1.0;
};

enum class MaterialFault { shear_modulus, gradient_coefficient, poisson_ratio };

struct ValidationError {
    MaterialFault fault;
    std::string message;
};

/// Returns std::nullopt when the material is admissible, otherwise the first
/// violated constraint.
inline std::optional<ValidationError> validate(const Material& m)
{
    if (!std::isfinite(m.mu) || m.mu <= 0.0)
        return ValidationError{MaterialFault::shear_modulus, "mu must be positive"};
    if (!std::isfinite(m.c) || m.c <= 0.0)
        return ValidationError{MaterialFault::gradient_coefficient, "c must be positive"};
    if (!std::isfinite(m.nu))
        return ValidationError{MaterialFault::poisson_ratio, "nu must be finite"};
    if (m.nu <= -1.0)
        return ValidationError{MaterialFault::poisson_ratio, "nu must exceed -1"};
    if (m.nu > max_poisson_ratio)
        return ValidationError{MaterialFault::poisson_ratio, "nu at incompressible limit"};
    return std::nullopt;
}

/// Throws std::invalid_argument carrying the validation message.
inline void require_valid(const Material& m)
{
    if (auto err = validate(m))
        throw std::invalid_argument(err->message);
}

/// r' = r / sqrt(c).
inline double normalize_radius(double r, double c)
{
    if (!(r >= 0.0) || !(c > 0.0))
        throw std::invalid_argument("normalize_radius: requires r >= 0 and c > 0");
    return r / std::sqrt(c);
}

/// r = r' sqrt(c).
inline double denormalize_radius(double r_prime, double c)
{
    if (!(r_prime >= 0.0) || !(c > 0.0))
        throw std::invalid_argument("denormalize_radius: requires r' >= 0 and c > 0");
    return r_prime * std::sqrt(c);
}

/// Physical surface displacement components [length].
struct SurfaceDisplacement {
    double ur = 0.0;
    double u3 = 0.0;
};

/**
 * Maps normalized surface displacements back to physical units:
 *   u_r = P ur_hat / (4 pi mu sqrt(c)),   u_3 = P u3_hat / (2 pi mu sqrt(c)).
 */
inline SurfaceDisplacement dimensionalize(double ur_hat, double u3_hat, const Material& m,
                                          const PointLoad& load)
{
    require_valid(m);
    const double scale = load.P / (std::numbers::pi * m.mu * m.ell());
    return {0.25 * scale * ur_hat, 0.5 * scale * u3_hat};
}

/// Inverse of dimensionalize.
inline SurfaceDisplacement normalize_displacement(const SurfaceDisplacement& u, const Material& m,
                                                  const PointLoad& load)
{
    require_valid(m);
    const double scale = std::numbers::pi * m.mu * m.ell() / load.P;
    return {4.0 * scale * u.ur, 2.0 * scale * u.u3};
}

} // namespace dipolar
