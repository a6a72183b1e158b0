#pragma once

#include "presstop/driver.hpp"

namespace presstop::testkit {

// Finite-difference oracles for dC/dx on a design-variable field x (one entry
// per element; only the design elements are perturbed).
struct GradientCheck {
  double max_rel_err = 0.0;
  Index worst_element = -1;
  Vector analytic;
  Vector fd;
};

// C(x) with a full pressure + displacement re-solve.
inline double full_compliance(Analysis& an, const Vector& x, const FilterKernel& k, const ActiveSets& sets) {
  const SolvedState s = an.solve(physical_density(x, k, sets));
  return compliance(s.u, s.K);
}

// C(x) with the load frozen at f.
inline double frozen_compliance(Analysis& an, const Vector& x, const FilterKernel& k, const ActiveSets& sets,
                                const Vector& f) {
  const Vector u = an.solve_displacement_for(physical_density(x, k, sets), f);
  return u.dot(f);
}

// Compares the adjoint gradient (with load terms when lst = 1) against central
// differences of step h. lst = 1 re-solves pressure and displacement; lst = 0
// keeps the load of the unperturbed state fixed, which is the derivative the
// stiffness term alone represents.
inline GradientCheck check_gradient(const ProblemSpec& spec, const Vector& x, int lst, double h) {
  Analysis an = make_analysis(spec);
  const FilterKernel k = build_kernel(spec.rmin, spec.nelx, spec.nely);
  const SolvedState state = an.solve(physical_density(x, k, spec.sets));
  const Evaluation ev = evaluate(an, state, k, spec.sets, lst, spec.volfrac);
  const Vector f = state.F;

  GradientCheck out;
  out.analytic = ev.dc_design;
  out.fd.resize(out.analytic.size());
  for (std::size_t j = 0; j < spec.sets.act.size(); ++j) {
    const Index e = spec.sets.act[j];
    Vector hi = x, lo = x;
    hi[e] += h;
    lo[e] -= h;
    const double chi = lst == 1 ? full_compliance(an, hi, k, spec.sets) : frozen_compliance(an, hi, k, spec.sets, f);
    const double clo = lst == 1 ? full_compliance(an, lo, k, spec.sets) : frozen_compliance(an, lo, k, spec.sets, f);
    const Index jj = static_cast<Index>(j);
    out.fd[jj] = (chi - clo) / (2 * h);
    const double err = std::abs(out.analytic[jj] - out.fd[jj]) / std::max(std::abs(out.fd[jj]), 1e-12);
    if (err > out.max_rel_err) {
      out.max_rel_err = err;
      out.worst_element = e;
    }
  }
  return out;
}

}  // namespace presstop::testkit
