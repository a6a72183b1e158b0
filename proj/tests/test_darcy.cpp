#include <gtest/gtest.h>

#include <cmath>

#include "presstop/darcy.hpp"
#include "support.hpp"

using namespace presstop;
using presstop::testkit::Gauss3;
using presstop::testkit::Q4;

namespace {

std::vector<PressureBc> column_bcs(const Mesh& m, double bottom, double top) {
  std::vector<PressureBc> bcs;
  for (Index n : m.dofs.top_nodes) bcs.push_back({n, top});
  for (Index n : m.dofs.bottom_nodes) bcs.push_back({n, bottom});
  std::sort(bcs.begin(), bcs.end(), [](auto& a, auto& b) { return a.node < b.node; });
  return bcs;
}

}  // namespace

TEST(SmoothHeaviside, EndpointsAndRegression) {
  EXPECT_EQ(smooth_heaviside(0.0, 8.0, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(smooth_heaviside(1.0, 8.0, 0.2), 1.0);
  // tanh(1.6) / (tanh(1.6) + tanh(6.4)), evaluated to 40 digits with mpmath.
  EXPECT_NEAR(smooth_heaviside(0.2, 8.0, 0.2), 0.479620276103667125232708878710321373112, 1e-15);
}

TEST(SmoothHeaviside, StrictlyIncreasingAndDerivative) {
  testkit::Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const double beta = rng.uniform(1, 20), eta = rng.uniform(0.05, 0.95);
    double prev = -1.0;
    for (int k = 0; k <= 20; ++k) {
      const double h = smooth_heaviside(k / 20.0, beta, eta);
      ASSERT_GT(h, prev);
      prev = h;
    }
    const double x = rng.uniform(0.01, 0.99), step = 1e-6;
    const double fd = (smooth_heaviside(x + step, beta, eta) - smooth_heaviside(x - step, beta, eta)) / (2 * step);
    // Relative to the peak slope scale beta: in the flat tails roundoff dominates.
    ASSERT_LE(testkit::rel_err(smooth_heaviside_derivative(x, beta, eta), fd, beta), 1e-6);
  }
}

TEST(SmoothHeaviside, RejectsOutOfDomain) {
  EXPECT_THROW(smooth_heaviside(-0.01, 8, 0.2), std::domain_error);
  EXPECT_THROW(smooth_heaviside(1.01, 8, 0.2), std::domain_error);
  EXPECT_THROW(smooth_heaviside(std::nan(""), 8, 0.2), std::domain_error);
  EXPECT_THROW(smooth_heaviside_derivative(2.0, 8, 0.2), std::domain_error);
}

TEST(FlowParams, DerivedCoefficients) {
  const FlowParams f;
  EXPECT_EQ(f.kvs(), 1e-7);
  EXPECT_NEAR(f.Ds(), std::pow(std::log(0.1) / 2.0, 2) * 1e-7, 1e-22);
  EXPECT_NO_THROW(f.validate());
  FlowParams bad = f;
  bad.r = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = f;
  bad.Pin = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(FlowCoefficients, EndpointValues) {
  const FlowParams f;
  EXPECT_EQ(flow_coeff(0.0, f), f.Kv);
  EXPECT_NEAR(flow_coeff(1.0, f), f.Kv * f.epsf, 1e-20);
  EXPECT_NEAR(drainage_coeff(1.0, f), f.Ds(), 1e-22);
  EXPECT_EQ(drainage_coeff(0.0, f), 0.0);
}

TEST(FlowCoefficients, MonotoneWithAnalyticDerivatives) {
  testkit::Rng rng(4);
  const FlowParams f;
  for (int trial = 0; trial < 40; ++trial) {
    const double x = rng.uniform(0.01, 0.99), step = 1e-6;
    EXPECT_LT(flow_coeff(x + 0.005, f), flow_coeff(x, f));
    EXPECT_GT(drainage_coeff(x + 0.005, f), drainage_coeff(x, f));
    const double fdk = (flow_coeff(x + step, f) - flow_coeff(x - step, f)) / (2 * step);
    const double fdd = (drainage_coeff(x + step, f) - drainage_coeff(x - step, f)) / (2 * step);
    EXPECT_LE(testkit::rel_err(flow_coeff_derivative(x, f), fdk), 1e-6);
    EXPECT_LE(testkit::rel_err(drainage_coeff_derivative(x, f), fdd), 1e-6);
  }
}

TEST(ElementFlowMatrices, QuadratureOracle) {
  const auto& em = element_flow_matrices();
  const Eigen::Matrix4d kp = Gauss3::integrate([](double x, double y) -> Eigen::Matrix4d {
    const auto g = Q4::grad(x, y);
    return g.transpose() * g;
  });
  const Eigen::Matrix4d kdp = Gauss3::integrate([](double x, double y) -> Eigen::Matrix4d {
    const Eigen::Vector4d n = Q4::n(x, y);
    return n * n.transpose();
  });
  EXPECT_LE((em.Kp - kp).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((em.KDp - kdp).cwiseAbs().maxCoeff(), 1e-15);

  Eigen::Matrix4d kp_ref;
  kp_ref << 4, -1, -2, -1, -1, 4, -1, -2, -2, -1, 4, -1, -1, -2, -1, 4;
  Eigen::Matrix4d kdp_ref;
  kdp_ref << 4, 2, 1, 2, 2, 4, 2, 1, 1, 2, 4, 2, 2, 1, 2, 4;
  EXPECT_LE((em.Kp - kp_ref / 6.0).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((em.KDp - kdp_ref / 36.0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ElementFlowMatrices, RowSumsAndArea) {
  const auto& em = element_flow_matrices();
  EXPECT_LE(em.Kp.rowwise().sum().cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(em.KDp.sum(), 1.0, 1e-14);
  EXPECT_EQ(em.Kp, em.Kp.transpose());
  EXPECT_EQ(em.KDp, em.KDp.transpose());
}

TEST(AssembleFlow, SingleVoidElementIsKvKp) {
  const Mesh m = build_mesh(1, 1);
  FlowParams f;
  f.Kv = 2.5;
  const Eigen::MatrixXd a = assemble_flow(Vector::Zero(1), m, f);
  const auto& pd = m.dofs.p_dofs[0];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(a(pd[i], pd[j]), 2.5 * element_flow_matrices().Kp(i, j));
}

TEST(AssembleFlow, SymmetricAndConnectivity) {
  testkit::Rng rng(9);
  const Mesh m = build_mesh(2, 2);
  const SparseMatrix a = assemble_flow(rng.vector(4, 0, 1), m, FlowParams{});
  ASSERT_EQ(a.rows(), 9);
  EXPECT_EQ((Eigen::MatrixXd(a) - Eigen::MatrixXd(a).transpose()).cwiseAbs().maxCoeff(), 0.0);
  const Index center = m.grid.node(1, 1);
  int nonzeros = 0;
  for (SparseMatrix::InnerIterator it(a, center); it; ++it) nonzeros += it.value() != 0.0;
  EXPECT_EQ(nonzeros, 9);  // coupled to all nodes of its 4 elements
  EXPECT_THROW(assemble_flow(Vector::Zero(3), m, FlowParams{}), std::invalid_argument);
}

// Property: entries of A track the analytic coefficient derivatives.
TEST(AssembleFlowProperty, EntriesDifferentiateAnalytically) {
  testkit::Rng rng(17);
  const Mesh m = build_mesh(3, 2);
  const FlowParams f;
  const auto& em = element_flow_matrices();
  for (int trial = 0; trial < 10; ++trial) {
    const Vector rho = rng.vector(m.grid.nel, 0.1, 0.9);
    const Index e = rng.integer(0, m.grid.nel - 1);
    const double step = 1e-6;
    Vector hi = rho, lo = rho;
    hi[e] += step;
    lo[e] -= step;
    const Eigen::MatrixXd fd =
        (Eigen::MatrixXd(assemble_flow(hi, m, f)) - Eigen::MatrixXd(assemble_flow(lo, m, f))) / (2 * step);
    const Eigen::Matrix4d da = flow_coeff_derivative(rho[e], f) * em.Kp +
                               drainage_coeff_derivative(rho[e], f) * em.KDp;
    const auto& pd = m.dofs.p_dofs[static_cast<std::size_t>(e)];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) EXPECT_LE(testkit::rel_err(fd(pd[i], pd[j]), da(i, j)), 1e-6);
  }
}

TEST(SolvePressure, VoidColumnIsLinear) {
  const Mesh m = build_mesh(1, 20);
  const FlowParams f;
  const PressureField pf = solve_pressure(assemble_flow(Vector::Zero(20), m, f), column_bcs(m, 1.0, 0.0));
  for (Index n = 0; n < m.grid.nno; ++n) EXPECT_NEAR(pf.p[n], 1.0 - m.grid.node_y(n) / 20.0, 1e-9);
}

TEST(SolvePressure, SolidColumnDecaysOverPenetrationDepth) {
  FlowParams f;
  f.Dels = 10.0;
  f.betaf = 50.0;
  const Mesh m = build_mesh(1, 40);
  const PressureField pf = solve_pressure(assemble_flow(Vector::Ones(40), m, f), column_bcs(m, f.Pin, 0.0));
  const double k = std::sqrt(f.Ds() / f.kvs());
  const double analytic = std::exp(-k * f.Dels);
  const double numeric = pf.p[m.grid.node(40 - 10, 0)] / f.Pin;
  EXPECT_NEAR(analytic, f.r, 1e-12);
  EXPECT_LE(std::abs(numeric - analytic) / analytic, 0.15);
}

TEST(SolvePressure, AllBoundaryAtPinGivesUniformField) {
  const Mesh m = build_mesh(4, 3);
  std::vector<PressureBc> bcs;
  for (Index n = 0; n < m.grid.nno; ++n) {
    const Index r = m.grid.node_row(n), c = m.grid.node_col(n);
    if (r == 0 || r == 3 || c == 0 || c == 4) bcs.push_back({n, 1.0});
  }
  const PressureField pf = solve_pressure(assemble_flow(Vector::Zero(12), m, FlowParams{}), bcs);
  for (Index n = 0; n < m.grid.nno; ++n) EXPECT_NEAR(pf.p[n], 1.0, 1e-12);
}

TEST(SolvePressure, PrescribedValuesUnchangedAndResidual) {
  testkit::Rng rng(30);
  const Mesh m = build_mesh(5, 4);
  const SparseMatrix a = assemble_flow(rng.vector(20, 0, 1), m, FlowParams{});
  const auto bcs = column_bcs(m, 1.0, 0.0);
  const PressureField pf = solve_pressure(a, bcs);
  for (const auto& bc : bcs) EXPECT_EQ(pf.p[bc.node], bc.value);
  const Vector r = a * pf.p;
  for (Index i : pf.partition.free) EXPECT_NEAR(r[i], 0.0, 1e-10);
}

TEST(SolvePressure, EmptyBoundaryRejected) {
  const Mesh m = build_mesh(2, 2);
  EXPECT_THROW(solve_pressure(assemble_flow(Vector::Zero(4), m, FlowParams{}), {}), SolverError);
}

// Property: discrete maximum principle on random densities and BC patterns.
TEST(SolvePressureProperty, MaximumPrinciple) {
  testkit::Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const Index nelx = rng.integer(1, 8), nely = rng.integer(1, 8);
    const Mesh m = build_mesh(nelx, nely);
    FlowParams f;
    f.Pin = rng.uniform(0.5, 3.0);
    std::vector<PressureBc> bcs;
    for (Index n : m.dofs.top_nodes) bcs.push_back({n, 0.0});
    for (Index n : m.dofs.bottom_nodes) bcs.push_back({n, f.Pin});
    if (rng.integer(0, 1)) {
      for (Index n : m.dofs.left_nodes) bcs.push_back({n, 0.0});
    }
    std::sort(bcs.begin(), bcs.end(), [](auto& a, auto& b) { return a.node < b.node; });
    bcs.erase(std::unique(bcs.begin(), bcs.end(), [](auto& a, auto& b) { return a.node == b.node; }),
              bcs.end());
    const PressureField pf = solve_pressure(assemble_flow(rng.vector(m.grid.nel, 0, 1), m, f), bcs);
    EXPECT_GE(pf.p.minCoeff(), -1e-9);
    EXPECT_LE(pf.p.maxCoeff(), f.Pin + 1e-9);
  }
}

// Property: densifying one element of a column never raises pressure
// downstream of it (away from the bottom source).
TEST(SolvePressureProperty, ColumnMonotonicity) {
  testkit::Rng rng(77);
  const Index nely = 20;
  const Mesh m = build_mesh(1, nely);
  const FlowParams f;
  const auto bcs = column_bcs(m, f.Pin, 0.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector rho = rng.vector(nely, 0, 0.8);
    const Index row = rng.integer(0, nely - 1);
    const Vector p0 = solve_pressure(assemble_flow(rho, m, f), bcs).p;
    rho[row] = std::min(1.0, rho[row] + rng.uniform(0.05, 0.2));
    const Vector p1 = solve_pressure(assemble_flow(rho, m, f), bcs).p;
    for (Index r = 0; r <= row; ++r) {  // nodes on or above the element's top edge
      for (Index c = 0; c <= 1; ++c) EXPECT_LE(p1[m.grid.node(r, c)], p0[m.grid.node(r, c)] + 1e-12);
    }
  }
}
