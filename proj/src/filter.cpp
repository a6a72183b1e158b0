#include "presstop/filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace presstop {

namespace {

// out(r, c) = sum_{dr, dc} h(dr, dc) in(r + dr, c + dc), zero outside.
Vector correlate(const Vector& in, const FilterKernel& k) {
  const Index R = k.radius;
  Vector out = Vector::Zero(in.size());
  for (Index c = 0; c < k.nelx; ++c) {
    for (Index r = 0; r < k.nely; ++r) {
      double acc = 0.0;
      const Index c0 = std::max<Index>(0, c - R), c1 = std::min<Index>(k.nelx - 1, c + R);
      const Index r0 = std::max<Index>(0, r - R), r1 = std::min<Index>(k.nely - 1, r + R);
      for (Index cc = c0; cc <= c1; ++cc) {
        for (Index rr = r0; rr <= r1; ++rr) {
          acc += k.h(rr - r + R, cc - c + R) * in[cc * k.nely + rr];
        }
      }
      out[c * k.nely + r] = acc;
    }
  }
  return out;
}

void check_shape(const Vector& v, const FilterKernel& k, const char* who) {
  if (v.size() != k.nelx * k.nely) {
    throw std::invalid_argument(std::string(who) + ": field has " + std::to_string(v.size()) +
                                " entries, expected " + std::to_string(k.nelx * k.nely));
  }
}

}  // namespace

FilterKernel build_kernel(double rmin, Index nelx, Index nely) {
  if (!(rmin > 0.0)) throw std::invalid_argument("build_kernel: rmin must be positive");
  if (nelx < 1 || nely < 1) throw std::invalid_argument("build_kernel: empty grid");
  FilterKernel k;
  k.rmin = rmin;
  k.nelx = nelx;
  k.nely = nely;
  k.radius = std::max<Index>(0, static_cast<Index>(std::ceil(rmin)) - 1);
  const Index w = 2 * k.radius + 1;
  k.h.resize(w, w);
  for (Index j = 0; j < w; ++j) {
    for (Index i = 0; i < w; ++i) {
      const double dx = static_cast<double>(j - k.radius);
      const double dy = static_cast<double>(i - k.radius);
      k.h(i, j) = std::max(0.0, rmin - std::sqrt(dx * dx + dy * dy));
    }
  }
  k.Hs = correlate(Vector::Ones(nelx * nely), k);
  return k;
}

Vector apply_filter(const Vector& x, const FilterKernel& k) {
  check_shape(x, k, "apply_filter");
  return correlate(x, k).cwiseQuotient(k.Hs);
}

Vector apply_filter_transpose(const Vector& s, const FilterKernel& k) {
  check_shape(s, k, "apply_filter_transpose");
  return correlate(s.cwiseQuotient(k.Hs), k);
}

}  // namespace presstop
