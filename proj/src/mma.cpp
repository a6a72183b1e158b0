#include "presstop/mma.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace presstop {

namespace {

using Eigen::ArrayXd;
using Eigen::MatrixXd;

constexpr double kRaa0 = 1e-5;
constexpr double kAlbefa = 0.1;
constexpr double kAsyInit = 0.5;
constexpr double kAsyIncr = 1.2;
constexpr double kAsyDecr = 0.7;
constexpr double kMove = 0.5;
constexpr double kEpsiMin = 1e-10;
constexpr int kMaxNewtonPerLevel = 200;
constexpr int kMaxHalvings = 50;

struct Subproblem {
  Index n = 0;
  Index m = 0;
  ArrayXd low, upp, alfa, beta, p0, q0;
  MatrixXd P, Q;
  double a0 = 1.0;
  ArrayXd a, b, c, d;
};

struct Iterate {
  ArrayXd x, y;
  double z = 1.0;
  ArrayXd lam, xsi, eta, mu;
  double zet = 1.0;
  ArrayXd s;
};

// Residual of the relaxed KKT conditions, in the order
// (x, y, z, lam, xsi, eta, mu, zet, s).
Vector kkt_residual(const Subproblem& sp, const Iterate& v, double epsi) {
  const ArrayXd ux1 = sp.upp - v.x;
  const ArrayXd xl1 = v.x - sp.low;
  const ArrayXd plam = sp.p0 + (sp.P.transpose() * v.lam.matrix()).array();
  const ArrayXd qlam = sp.q0 + (sp.Q.transpose() * v.lam.matrix()).array();
  const ArrayXd gvec =
      (sp.P * ux1.inverse().matrix() + sp.Q * xl1.inverse().matrix()).array();
  const ArrayXd dpsidx = plam / ux1.square() - qlam / xl1.square();

  const Index n = sp.n, m = sp.m;
  Vector r(3 * n + 4 * m + 2);
  Index k = 0;
  r.segment(k, n) = (dpsidx - v.xsi + v.eta).matrix(); k += n;
  r.segment(k, m) = (sp.c + sp.d * v.y - v.mu - v.lam).matrix(); k += m;
  r[k++] = sp.a0 - v.zet - (sp.a * v.lam).sum();
  r.segment(k, m) = (gvec - sp.a * v.z - v.y + v.s - sp.b).matrix(); k += m;
  r.segment(k, n) = (v.xsi * (v.x - sp.alfa) - epsi).matrix(); k += n;
  r.segment(k, n) = (v.eta * (sp.beta - v.x) - epsi).matrix(); k += n;
  r.segment(k, m) = (v.mu * v.y - epsi).matrix(); k += m;
  r[k++] = v.zet * v.z - epsi;
  r.segment(k, m) = (v.lam * v.s - epsi).matrix();
  return r;
}

Iterate solve_subproblem(const Subproblem& sp, MmaSubproblemStats& stats) {
  const Index n = sp.n, m = sp.m;
  Iterate v;
  v.x = 0.5 * (sp.alfa + sp.beta);
  v.y = ArrayXd::Ones(m);
  v.z = 1.0;
  v.lam = ArrayXd::Ones(m);
  v.xsi = (v.x - sp.alfa).inverse().max(1.0);
  v.eta = (sp.beta - v.x).inverse().max(1.0);
  v.mu = (0.5 * sp.c).max(1.0);
  v.zet = 1.0;
  v.s = ArrayXd::Ones(m);

  double epsi = 1.0;
  while (epsi > 0.99 * kEpsiMin) {
    Vector res = kkt_residual(sp, v, epsi);
    double resnorm = res.norm();
    double resmax = res.cwiseAbs().maxCoeff();
    int steps = 0;
    while (resmax > 0.9 * epsi && steps < kMaxNewtonPerLevel) {
      ++steps;
      ++stats.newton_steps;
      const ArrayXd ux1 = sp.upp - v.x;
      const ArrayXd xl1 = v.x - sp.low;
      const ArrayXd ux2 = ux1.square(), xl2 = xl1.square();
      const ArrayXd ux3 = ux1 * ux2, xl3 = xl1 * xl2;
      const ArrayXd plam = sp.p0 + (sp.P.transpose() * v.lam.matrix()).array();
      const ArrayXd qlam = sp.q0 + (sp.Q.transpose() * v.lam.matrix()).array();
      const ArrayXd gvec =
          (sp.P * ux1.inverse().matrix() + sp.Q * xl1.inverse().matrix()).array();
      const MatrixXd GG = sp.P * ux2.inverse().matrix().asDiagonal() -
                          sp.Q * xl2.inverse().matrix().asDiagonal();
      const ArrayXd dpsidx = plam / ux2 - qlam / xl2;
      const ArrayXd delx = dpsidx - epsi / (v.x - sp.alfa) + epsi / (sp.beta - v.x);
      const ArrayXd dely = sp.c + sp.d * v.y - v.lam - epsi / v.y;
      const double delz = sp.a0 - (sp.a * v.lam).sum() - epsi / v.z;
      const ArrayXd dellam = gvec - sp.a * v.z - v.y - sp.b + epsi / v.lam;
      const ArrayXd diagx =
          2.0 * (plam / ux3 + qlam / xl3) + v.xsi / (v.x - sp.alfa) + v.eta / (sp.beta - v.x);
      const ArrayXd diagxinv = diagx.inverse();
      const ArrayXd diagy = sp.d + v.mu / v.y;
      const ArrayXd diaglamyi = v.s / v.lam + diagy.inverse();

      ArrayXd dx, dlam;
      double dz = 0.0;
      if (m < n) {
        const Vector blam =
            (dellam + dely / diagy).matrix() - GG * (delx / diagx).matrix();
        MatrixXd AA(m + 1, m + 1);
        AA.topLeftCorner(m, m) =
            MatrixXd(diaglamyi.matrix().asDiagonal()) +
            GG * diagxinv.matrix().asDiagonal() * GG.transpose();
        AA.topRightCorner(m, 1) = sp.a.matrix();
        AA.bottomLeftCorner(1, m) = sp.a.matrix().transpose();
        AA(m, m) = -v.zet / v.z;
        Vector bb(m + 1);
        bb.head(m) = blam;
        bb[m] = delz;
        const Vector sol = AA.partialPivLu().solve(bb);
        dlam = sol.head(m).array();
        dz = sol[m];
        dx = -delx / diagx - (GG.transpose() * dlam.matrix()).array() / diagx;
      } else {
        const ArrayXd diaglamyiinv = diaglamyi.inverse();
        const ArrayXd dellamyi = dellam + dely / diagy;
        MatrixXd Axx = MatrixXd(diagx.matrix().asDiagonal()) +
                       GG.transpose() * diaglamyiinv.matrix().asDiagonal() * GG;
        const double azz = v.zet / v.z + (sp.a * (sp.a / diaglamyi)).sum();
        const Vector axz = -GG.transpose() * (sp.a / diaglamyi).matrix();
        const Vector bx = delx.matrix() + GG.transpose() * (dellamyi / diaglamyi).matrix();
        const double bz = delz - (sp.a * (dellamyi / diaglamyi)).sum();
        MatrixXd AA(n + 1, n + 1);
        AA.topLeftCorner(n, n) = Axx;
        AA.topRightCorner(n, 1) = axz;
        AA.bottomLeftCorner(1, n) = axz.transpose();
        AA(n, n) = azz;
        Vector bb(n + 1);
        bb.head(n) = -bx;
        bb[n] = -bz;
        const Vector sol = AA.partialPivLu().solve(bb);
        dx = sol.head(n).array();
        dz = sol[n];
        dlam = (GG * dx.matrix()).array() / diaglamyi - dz * (sp.a / diaglamyi) +
               dellamyi / diaglamyi;
      }
      const ArrayXd dy = -dely / diagy + dlam / diagy;
      const ArrayXd dxsi = -v.xsi + epsi / (v.x - sp.alfa) - (v.xsi * dx) / (v.x - sp.alfa);
      const ArrayXd deta = -v.eta + epsi / (sp.beta - v.x) + (v.eta * dx) / (sp.beta - v.x);
      const ArrayXd dmu = -v.mu + epsi / v.y - (v.mu * dy) / v.y;
      const double dzet = -v.zet + epsi / v.z - v.zet * dz / v.z;
      const ArrayXd ds = -v.s + epsi / v.lam - (v.s * dlam) / v.lam;

      // Largest step keeping every positive variable positive and x inside
      // (alfa, beta), with a 1% safety margin.
      double stm = 1.0;
      auto bound = [&](const ArrayXd& val, const ArrayXd& dval) {
        if (val.size() > 0) stm = std::max(stm, (-1.01 * dval / val).maxCoeff());
      };
      bound(v.y, dy);
      stm = std::max(stm, -1.01 * dz / v.z);
      bound(v.lam, dlam);
      bound(v.xsi, dxsi);
      bound(v.eta, deta);
      bound(v.mu, dmu);
      stm = std::max(stm, -1.01 * dzet / v.zet);
      bound(v.s, ds);
      stm = std::max(stm, (-1.01 * dx / (v.x - sp.alfa)).maxCoeff());
      stm = std::max(stm, (1.01 * dx / (sp.beta - v.x)).maxCoeff());
      double step = 1.0 / stm;

      const Iterate old = v;
      double resnew = 2.0 * resnorm;
      int halvings = 0;
      while (resnew > resnorm && halvings < kMaxHalvings) {
        ++halvings;
        v.x = old.x + step * dx;
        v.y = old.y + step * dy;
        v.z = old.z + step * dz;
        v.lam = old.lam + step * dlam;
        v.xsi = old.xsi + step * dxsi;
        v.eta = old.eta + step * deta;
        v.mu = old.mu + step * dmu;
        v.zet = old.zet + step * dzet;
        v.s = old.s + step * ds;
        res = kkt_residual(sp, v, epsi);
        resnew = res.norm();
        step /= 2.0;
      }
      if (resnew > resnorm) stats.monotone = false;
      resnorm = resnew;
      resmax = res.cwiseAbs().maxCoeff();
    }
    stats.max_steps_per_level = std::max(stats.max_steps_per_level, steps);
    epsi *= 0.1;
  }
  stats.kkt_residual = kkt_residual(sp, v, 0.0).cwiseAbs().maxCoeff();
  return v;
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string("mma_update: non-finite ") + what);
}

}  // namespace

MmaState MmaState::create(const Vector& x0, Index m, double move_limit) {
  if (m < 0) throw std::invalid_argument("MmaState: negative constraint count");
  if (!(move_limit > 0.0)) throw std::invalid_argument("MmaState: move limit must be positive");
  MmaState s;
  s.n = x0.size();
  s.m = m;
  s.low = Vector::Zero(s.n);
  s.upp = Vector::Ones(s.n);
  s.xold1 = x0;
  s.xold2 = x0;
  s.a0 = 1.0;
  s.a = Vector::Zero(m);
  s.c = Vector::Constant(m, 1000.0);
  s.d = Vector::Zero(m);
  s.move_limit = move_limit;
  return s;
}

MmaResult mma_update(const Vector& x, double f0, const Vector& df0dx, const Vector& fval,
                     const Eigen::MatrixXd& dfdx, const Vector& xmin, const Vector& xmax,
                     MmaState& state) {
  const Index n = state.n, m = state.m;
  if (x.size() != n || df0dx.size() != n || xmin.size() != n || xmax.size() != n ||
      fval.size() != m || dfdx.rows() != m || dfdx.cols() != n || state.xold1.size() != n ||
      state.xold2.size() != n || state.a.size() != m || state.c.size() != m ||
      state.d.size() != m) {
    throw std::invalid_argument("mma_update: inconsistent problem dimensions");
  }
  if (!std::isfinite(f0)) throw std::invalid_argument("mma_update: non-finite objective");
  require_finite(x, "design");
  require_finite(df0dx, "objective gradient");
  require_finite(fval, "constraint values");
  if (!dfdx.allFinite()) throw std::invalid_argument("mma_update: non-finite constraint gradient");
  if ((xmin.array() > xmax.array()).any()) {
    throw std::invalid_argument("mma_update: lower bound above upper bound");
  }

  const ArrayXd xval = x.array();
  const ArrayXd xlo = xmin.array().max(xval - state.move_limit);
  const ArrayXd xhi = xmax.array().min(xval + state.move_limit);
  const ArrayXd span = xhi - xlo;

  ArrayXd low, upp;
  if (state.iter < 2) {
    low = xval - kAsyInit * span;
    upp = xval + kAsyInit * span;
  } else {
    const ArrayXd zzz = (xval - state.xold1.array()) * (state.xold1.array() - state.xold2.array());
    const ArrayXd factor =
        (zzz > 0.0).select(kAsyIncr, (zzz < 0.0).select(kAsyDecr, ArrayXd::Ones(n)));
    low = xval - factor * (state.xold1.array() - state.low.array());
    upp = xval + factor * (state.upp.array() - state.xold1.array());
    low = low.max(xval - 10.0 * span).min(xval - 0.01 * span);
    upp = upp.min(xval + 10.0 * span).max(xval + 0.01 * span);
  }

  Subproblem sp;
  sp.n = n;
  sp.m = m;
  sp.low = low;
  sp.upp = upp;
  sp.alfa = (low + kAlbefa * (xval - low)).max(xval - kMove * span).max(xlo);
  sp.beta = (upp - kAlbefa * (upp - xval)).min(xval + kMove * span).min(xhi);

  // The objective gradient is divided by its largest magnitude, so a0, c and d
  // act on a unit-scale objective and the update does not depend on the
  // scale of f0.
  double scale = df0dx.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;

  const ArrayXd xmamiinv = span.max(1e-5).inverse();
  const ArrayXd ux1 = upp - xval, xl1 = xval - low;
  const ArrayXd ux2 = ux1.square(), xl2 = xl1.square();
  const ArrayXd g0 = df0dx.array() / scale;
  ArrayXd p0 = g0.max(0.0), q0 = (-g0).max(0.0);
  const ArrayXd pq0 = 0.001 * (p0 + q0) + kRaa0 * xmamiinv;
  sp.p0 = (p0 + pq0) * ux2;
  sp.q0 = (q0 + pq0) * xl2;

  MatrixXd P = dfdx.cwiseMax(0.0), Q = (-dfdx).cwiseMax(0.0);
  const MatrixXd PQ = 0.001 * (P + Q) + kRaa0 * Vector::Ones(m) * xmamiinv.matrix().transpose();
  sp.P = (P + PQ) * ux2.matrix().asDiagonal();
  sp.Q = (Q + PQ) * xl2.matrix().asDiagonal();
  sp.b = (sp.P * ux1.inverse().matrix() + sp.Q * xl1.inverse().matrix() - fval).array();
  sp.a0 = state.a0;
  sp.a = state.a.array();
  sp.c = state.c.array();
  sp.d = state.d.array();

  MmaResult r;
  const Iterate v = solve_subproblem(sp, r.stats);
  r.xmma = v.x.matrix();
  r.low = low.matrix();
  r.upp = upp.matrix();
  r.xmin = xlo.matrix();
  r.xmax = xhi.matrix();
  r.y = v.y.matrix();
  r.z = v.z;
  r.lam = v.lam.matrix() * scale;
  r.xsi = v.xsi.matrix() * scale;
  r.eta = v.eta.matrix() * scale;
  r.mu = v.mu.matrix() * scale;
  r.zet = v.zet * scale;
  r.s = v.s.matrix();

  state.low = r.low;
  state.upp = r.upp;
  state.xold2 = state.xold1;
  state.xold1 = x;
  ++state.iter;
  return r;
}

}  // namespace presstop
