/**
 * @file dipolar.hpp
 * @brief Umbrella header for the library.
 */
#pragma once

#include "dipolar/kernels.hpp"
#include "dipolar/model.hpp"
#include "dipolar/quadrature.hpp"
#include "dipolar/specfun.hpp"
#include "dipolar/superposition.hpp"
#include "dipolar/surface.hpp"
#include "dipolar/transform.hpp"
