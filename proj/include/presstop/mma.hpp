#pragma once

#include <Eigen/Core>

#include "presstop/linalg.hpp"

namespace presstop {

// Method of Moving Asymptotes for
//
//   min f0(x) + a0 z + sum_i (c_i y_i + d_i y_i^2 / 2)
//   s.t. f_i(x) - a_i z - y_i <= 0,  xmin <= x <= xmax,  y, z >= 0.
//
// Each update builds the separable convex approximation around the current
// point, inside a box further restricted by the move limit, and solves it with
// a primal-dual interior point method.
struct MmaState {
  Index n = 0;
  Index m = 0;
  Vector low;
  Vector upp;
  Vector xold1;
  Vector xold2;
  double a0 = 1.0;
  Vector a;
  Vector c;
  Vector d;
  double move_limit = 0.1;
  int iter = 0;  // completed updates

  // a0 = 1, a = 0, c = 1000, d = 0.
  static MmaState create(const Vector& x0, Index m, double move_limit = 0.1);
};

struct MmaSubproblemStats {
  int newton_steps = 0;
  int max_steps_per_level = 0;
  bool monotone = true;       // every accepted Newton step reduced the residual norm
  double kkt_residual = 0.0;  // max-norm of the unrelaxed KKT residual at the solution
};

struct MmaResult {
  Vector xmma;
  Vector low;
  Vector upp;
  Vector xmin;  // move-limited box actually used
  Vector xmax;
  Vector y;
  double z = 0.0;
  Vector lam;  // constraint multipliers
  Vector xsi;
  Vector eta;
  Vector mu;
  double zet = 0.0;
  Vector s;
  MmaSubproblemStats stats;
};

// One MMA update. `dfdx` is m x n. On return `state` holds the new asymptotes,
// the shifted design history and the incremented iteration counter.
// Throws std::invalid_argument on size mismatch or non-finite input.
MmaResult mma_update(const Vector& x, double f0, const Vector& df0dx, const Vector& fval,
                     const Eigen::MatrixXd& dfdx, const Vector& xmin, const Vector& xmax,
                     MmaState& state);

}  // namespace presstop
