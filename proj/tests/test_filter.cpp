#include <gtest/gtest.h>

#include <cmath>

#include "presstop/filter.hpp"
#include "support.hpp"

using namespace presstop;

TEST(FilterKernel, SmallRadiusIsIdentity) {
  testkit::Rng rng(1);
  for (double rmin : {0.3, 1.0}) {
    const FilterKernel k = build_kernel(rmin, 5, 4);
    EXPECT_EQ(k.radius, 0);
    EXPECT_EQ(k.h.rows(), 1);
    const Vector x = rng.vector(20, 0, 1);
    EXPECT_LE((apply_filter(x, k) - x).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((apply_filter_transpose(x, k) - x).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(FilterKernel, StencilForRadiusOneAndAHalf) {
  const FilterKernel k = build_kernel(1.5, 5, 5);
  ASSERT_EQ(k.h.rows(), 3);
  ASSERT_EQ(k.h.cols(), 3);
  EXPECT_DOUBLE_EQ(k.h(1, 1), 1.5);
  for (auto [i, j] : {std::pair{0, 1}, {2, 1}, {1, 0}, {1, 2}}) EXPECT_DOUBLE_EQ(k.h(i, j), 0.5);
  for (auto [i, j] : {std::pair{0, 0}, {0, 2}, {2, 0}, {2, 2}}) EXPECT_DOUBLE_EQ(k.h(i, j), 1.5 - std::sqrt(2.0));
  // Interior element sees the whole stencil; a corner only part of it.
  const GridMesh g = build_mesh(5, 5).grid;
  EXPECT_DOUBLE_EQ(k.Hs[g.element(2, 2)], k.h.sum());
  EXPECT_LT(k.Hs[g.element(0, 0)], k.h.sum());
  EXPECT_DOUBLE_EQ(k.Hs[g.element(0, 0)], 1.5 + 0.5 + 0.5 + (1.5 - std::sqrt(2.0)));
}

TEST(FilterKernel, StencilSymmetricCenterIsRmin) {
  for (double rmin : {1.2, 2.4, 3.0, 6.0}) {
    const FilterKernel k = build_kernel(rmin, 8, 8);
    EXPECT_EQ(k.radius, static_cast<Index>(std::ceil(rmin)) - 1);
    EXPECT_EQ(k.h(k.radius, k.radius), rmin);
    EXPECT_EQ(k.h, k.h.rowwise().reverse());
    EXPECT_EQ(k.h, k.h.colwise().reverse());
    EXPECT_GT(k.Hs.minCoeff(), 0.0);
  }
}

TEST(FilterKernel, RejectsBadArguments) {
  EXPECT_THROW(build_kernel(0.0, 3, 3), std::invalid_argument);
  EXPECT_THROW(build_kernel(-1.0, 3, 3), std::invalid_argument);
  EXPECT_THROW(build_kernel(1.5, 0, 3), std::invalid_argument);
  const FilterKernel k = build_kernel(1.5, 3, 3);
  EXPECT_THROW(apply_filter(Vector::Zero(8), k), std::invalid_argument);
  EXPECT_THROW(apply_filter_transpose(Vector::Zero(10), k), std::invalid_argument);
}

TEST(ApplyFilter, SpikeSpreadsByStencilWeights) {
  const Index n = 5;
  const FilterKernel k = build_kernel(1.5, n, n);
  const GridMesh g = build_mesh(n, n).grid;
  Vector x = Vector::Zero(n * n);
  x[g.element(2, 2)] = 1.0;
  const Vector y = apply_filter(x, k);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      const double d = std::hypot(static_cast<double>(r - 2), static_cast<double>(c - 2));
      const double w = std::max(0.0, 1.5 - d);
      EXPECT_NEAR(y[g.element(r, c)], w / k.Hs[g.element(r, c)], 1e-15);
    }
  }
}

// Property: uniform fields are preserved on every shape, including 1 x 1.
TEST(ApplyFilterProperty, UniformFieldPreserved) {
  testkit::Rng rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const Index nelx = trial == 0 ? 1 : rng.integer(1, 12);
    const Index nely = trial == 0 ? 1 : rng.integer(1, 12);
    const double rmin = rng.uniform(0.5, 5.0), c = rng.uniform(-2, 2);
    const FilterKernel k = build_kernel(rmin, nelx, nely);
    const Vector y = apply_filter(Vector::Constant(nelx * nely, c), k);
    EXPECT_LE((y.array() - c).abs().maxCoeff(), 1e-12);
  }
}

// Property: <H x, s> = <x, H^T s>.
TEST(ApplyFilterProperty, AdjointIdentity) {
  testkit::Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const Index nelx = rng.integer(1, 12), nely = rng.integer(1, 12);
    const FilterKernel k = build_kernel(rng.uniform(0.5, 5.0), nelx, nely);
    const Vector x = rng.vector(nelx * nely, -1, 1), s = rng.vector(nelx * nely, -1, 1);
    EXPECT_NEAR(apply_filter(x, k).dot(s), x.dot(apply_filter_transpose(s, k)), 1e-12);
  }
}

// Property: outputs are convex combinations and weighted mass is conserved.
TEST(ApplyFilterProperty, RangeAndMass) {
  testkit::Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Index nelx = rng.integer(1, 10), nely = rng.integer(1, 10);
    const FilterKernel k = build_kernel(rng.uniform(0.5, 4.0), nelx, nely);
    const Vector x = rng.vector(nelx * nely, 0, 1);
    const Vector y = apply_filter(x, k);
    EXPECT_GE(y.minCoeff(), x.minCoeff() - 1e-15);
    EXPECT_LE(y.maxCoeff(), x.maxCoeff() + 1e-15);
    // sum_e y_e Hs_e = sum_e x_e * (stencil mass seen from e) = <x, H^T Hs>.
    const Vector mass = apply_filter_transpose(k.Hs, k);
    EXPECT_NEAR(y.dot(k.Hs), x.dot(mass), 1e-11);
  }
}

TEST(ApplyFilterTranspose, FiniteDifferenceOfFunctional) {
  testkit::Rng rng(5);
  const Index nelx = 6, nely = 5;
  const FilterKernel k = build_kernel(2.4, nelx, nely);
  const Vector w = rng.vector(nelx * nely, -1, 1);
  auto functional = [&](const Vector& x) {
    const Vector y = apply_filter(x, k);
    return (y.array().square() * w.array()).sum();
  };
  const Vector x = rng.vector(nelx * nely, 0, 1);
  const Vector y = apply_filter(x, k);
  const Vector grad = apply_filter_transpose((2.0 * y.array() * w.array()).matrix(), k);
  const double step = 1e-6;
  for (Index e = 0; e < nelx * nely; ++e) {
    Vector hi = x, lo = x;
    hi[e] += step;
    lo[e] -= step;
    const double fd = (functional(hi) - functional(lo)) / (2 * step);
    EXPECT_LE(std::abs(grad[e] - fd) / std::max(std::abs(fd), 1e-3), 1e-6);
  }
}
