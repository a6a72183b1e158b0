#include "presstop/driver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "presstop/mma.hpp"

namespace presstop {

namespace {

constexpr double kChangeThreshold = 0.01;

Vector gather(const Vector& full, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = full[idx[k]];
  return out;
}

double active_mean(const Vector& rho, const ActiveSets& sets) {
  if (sets.act.empty()) return 0.0;
  double sum = 0.0;
  for (Index e : sets.act) sum += rho[e];
  return sum / static_cast<double>(sets.act.size());
}

}  // namespace

std::string to_string(Termination t) {
  return t == Termination::maxit ? "maxit" : "change_threshold";
}

Vector initial_design(const ProblemSpec& spec) {
  const Index nel = spec.nelx * spec.nely;
  const auto& sets = spec.sets;
  if (sets.act.empty()) throw std::invalid_argument("initial_design: no design elements");
  const double start = (spec.volfrac * static_cast<double>(nel) - static_cast<double>(sets.nds.size())) /
                       static_cast<double>(sets.act.size());
  if (!(start >= 0.0 && start <= 1.0)) {
    throw std::invalid_argument("initial_design: volume target unreachable with the given NDS set");
  }
  Vector x = Vector::Zero(nel);
  for (Index e : sets.act) x[e] = start;
  for (Index e : sets.nds) x[e] = 1.0;
  return x;
}

Vector physical_density(const Vector& x, const FilterKernel& kernel, const ActiveSets& sets) {
  Vector rho = apply_filter(x, kernel);
  for (Index e : sets.nds) rho[e] = 1.0;
  for (Index e : sets.ndv) rho[e] = 0.0;
  return rho;
}

Evaluation evaluate(Analysis& analysis, const SolvedState& state, const FilterKernel& kernel,
                    const ActiveSets& sets, int lst, double volfrac) {
  Evaluation ev;
  ev.compliance = compliance(state.u, state.K);
  ev.lam1 = analysis.adjoint_lambda1(state);
  ev.terms = analysis.objective_terms(state, ev.lam1);
  ev.dc_filt = combine_terms(ev.terms, lst);
  ev.dc_design = chain_to_design(ev.dc_filt, kernel, sets);
  ev.volume = volume_and_sensitivity(state.rho_filt, sets, kernel, volfrac);
  return ev;
}

Analysis make_analysis(const ProblemSpec& spec) {
  return Analysis(build_mesh(spec.nelx, spec.nely), spec.flow, spec.material, spec.pressure_bcs,
                  spec.fixed_u_dofs);
}

OptimizationResult optimize(const ProblemSpec& spec, const IterationHook& hook) {
  validate(spec);
  const auto& sets = spec.sets;
  const FilterKernel kernel = build_kernel(spec.rmin, spec.nelx, spec.nely);
  Analysis analysis = make_analysis(spec);

  OptimizationResult res;
  res.x = initial_design(spec);
  res.rho_filt = physical_density(res.x, kernel, sets);

  const Index n = static_cast<Index>(sets.act.size());
  MmaState mma = MmaState::create(gather(res.x, sets.act), 1, spec.move_limit);
  const Vector lower = Vector::Zero(n);
  const Vector upper = Vector::Ones(n);
  Eigen::MatrixXd dfdx(1, n);
  Vector fval(1);

  double change = 1.0;
  int iter = 0;
  while (iter < spec.maxit && change > kChangeThreshold) {
    ++iter;
    try {
      const SolvedState state = analysis.solve(res.rho_filt);
      Evaluation ev = evaluate(analysis, state, kernel, sets, spec.lst, spec.volfrac);
      if (iter == 1) res.normf = objective_normalization(ev.compliance);

      const Vector xact = gather(res.x, sets.act);
      fval[0] = ev.volume.value;
      dfdx.row(0) = ev.volume.gradient.transpose();
      const MmaResult step = mma_update(xact, res.normf * ev.compliance, res.normf * ev.dc_design,
                                        fval, dfdx, lower, upper, mma);

      change = (step.xmma - xact).cwiseAbs().maxCoeff();
      for (Index k = 0; k < n; ++k) res.x[sets.act[static_cast<std::size_t>(k)]] = step.xmma[k];
      res.rho_filt = physical_density(res.x, kernel, sets);

      IterationRecord rec;
      rec.iter = iter;
      rec.obj = res.normf * ev.compliance;
      rec.mean_density = res.rho_filt.mean();
      rec.change = change;
      rec.compliance = ev.compliance;
      res.history.push_back(rec);
      if (hook) hook(rec.iter, rec.obj, rec.mean_density, rec.change, res.rho_filt);
    } catch (const SolverError& e) {
      throw SolverError("iteration " + std::to_string(iter) + ": " + e.what());
    }
  }
  res.termination = change > kChangeThreshold ? Termination::maxit : Termination::change_threshold;
  res.active_mean = active_mean(res.rho_filt, sets);
  return res;
}

}  // namespace presstop
