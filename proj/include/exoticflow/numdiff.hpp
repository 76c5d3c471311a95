#pragma once

#include "exoticflow/tensor.hpp"
#include "exoticflow/types.hpp"

namespace exoticflow {

// Central-difference Jacobian, column j = (F(x + h e_j) − F(x − h e_j)) / 2h.
// Exact for affine maps up to rounding; O(h²) for C³ maps.
Mat fd_jacobian(const VecMap& map, const Vec& point, double step);

// Central second differences, indexed (out, i, j). Diagonal entries use the
// three-point stencil, off-diagonal the four-point mixed stencil.
Tensor fd_hessian(const VecMap& map, const Vec& point, double step);

}  // namespace exoticflow
