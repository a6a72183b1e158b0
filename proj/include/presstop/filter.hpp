#pragma once

#include <Eigen/Core>

#include "presstop/linalg.hpp"
#include "presstop/mesh.hpp"

namespace presstop {

// Density filter with linear hat weights max(0, rmin - dist), zero extension
// outside the grid, and per-element normalization Hs.
//
// Element fields are column-major (nely x nelx) images, matching the element
// numbering of GridMesh.
struct FilterKernel {
  double rmin = 0.0;
  Index nelx = 0;
  Index nely = 0;
  Index radius = 0;           // stencil half width, ceil(rmin) - 1
  Eigen::MatrixXd h;          // (2 radius + 1) square stencil
  Vector Hs;                  // correlate(ones, h), one entry per element
};

FilterKernel build_kernel(double rmin, Index nelx, Index nely);

// x_filt = correlate(x, h) / Hs.
Vector apply_filter(const Vector& x, const FilterKernel& k);

// Exact adjoint of apply_filter: correlate(s / Hs, h).
Vector apply_filter_transpose(const Vector& s, const FilterKernel& k);

}  // namespace presstop
