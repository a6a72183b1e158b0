#pragma once

#include <functional>
#include <string>
#include <vector>

#include "presstop/filter.hpp"
#include "presstop/linalg.hpp"
#include "presstop/problems.hpp"
#include "presstop/sensitivity.hpp"

namespace presstop {

struct IterationRecord {
  int iter = 0;
  double obj = 0.0;           // normalized compliance
  double mean_density = 0.0;  // mean of rho_filt over all elements
  double change = 0.0;        // max |x_new - x_old| over the design elements
  double compliance = 0.0;    // raw u^T K u

  bool operator==(const IterationRecord&) const = default;
};

enum class Termination { maxit, change_threshold };

std::string to_string(Termination t);

struct OptimizationResult {
  Vector x;         // design variables, one per element (NDS = 1, NDV = 0)
  Vector rho_filt;  // physical densities
  std::vector<IterationRecord> history;
  Termination termination = Termination::maxit;
  double normf = 1.0;
  double active_mean = 0.0;  // mean of rho_filt over the design elements
};

// (iteration, normalized objective, mean density, change, physical densities
// after the update).
using IterationHook = std::function<void(int, double, double, double, const Vector&)>;

// Uniform start meeting the volume target exactly: (volfrac nel - |NDS|) / |act|
// on the design elements, 1 on NDS, 0 on NDV.
Vector initial_design(const ProblemSpec& spec);

// Filtered design with the non-design elements overwritten.
Vector physical_density(const Vector& x, const FilterKernel& kernel, const ActiveSets& sets);

// Objective and constraint data at one solved state.
struct Evaluation {
  double compliance = 0.0;
  ObjectiveTerms terms;  // per element, w.r.t. rho_filt
  Vector lam1;
  Vector dc_filt;        // combined dC/d(rho_filt)
  Vector dc_design;      // dC/dx over the design elements
  VolumeConstraint volume;
};

Evaluation evaluate(Analysis& analysis, const SolvedState& state, const FilterKernel& kernel,
                    const ActiveSets& sets, int lst, double volfrac);

Analysis make_analysis(const ProblemSpec& spec);

// Runs the MMA loop until spec.maxit iterations or a design change <= 0.01.
// Solver failures are rethrown as SolverError prefixed with the iteration.
OptimizationResult optimize(const ProblemSpec& spec, const IterationHook& hook = {});

}  // namespace presstop
