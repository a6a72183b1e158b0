#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>

#include "presstop/linalg.hpp"
#include "presstop/mesh.hpp"

namespace presstop::testkit {

// Seeded generator for the hand-rolled property tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  Index integer(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(gen_); }

  Vector vector(Index n, double lo, double hi) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  Eigen::MatrixXd matrix(Index r, Index c, double lo, double hi) {
    Eigen::MatrixXd m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = uniform(lo, hi);
    return m;
  }

 private:
  std::mt19937_64 gen_;
};

// Bilinear shape functions on [0,1]^2, nodes counterclockwise from (0,0).
struct Q4 {
  static constexpr std::array<double, 4> xs = {0.0, 1.0, 1.0, 0.0};
  static constexpr std::array<double, 4> ys = {0.0, 0.0, 1.0, 1.0};

  static Eigen::Vector4d n(double x, double y) {
    return {(1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y};
  }
  // Rows: d/dx, d/dy.
  static Eigen::Matrix<double, 2, 4> grad(double x, double y) {
    Eigen::Matrix<double, 2, 4> g;
    g << -(1 - y), (1 - y), y, -y,
         -(1 - x), -x, x, (1 - x);
    return g;
  }
};

// Gauss-Legendre rule with 3 points on [0, 1]; exact to degree 5.
struct Gauss3 {
  static constexpr std::array<double, 3> pts = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
  static constexpr std::array<double, 3> wts = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

  template <class F>
  static auto integrate(F&& f) {
    std::decay_t<decltype(f(pts[0], pts[0]))> acc = f(pts[0], pts[0]);
    acc.setZero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) acc += wts[i] * wts[j] * f(pts[i], pts[j]);
    return acc;
  }
};

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

}  // namespace presstop::testkit
