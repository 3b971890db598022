// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>

#include "podnn/log.hpp"
#include "podnn/pod.hpp"
#include "podnn/problems.hpp"
#include "podnn/rom.hpp"

using namespace podnn;
using namespace podnn::rom;

namespace
{

Eigen::MatrixXd random_matrix(Index rows, Index cols, std::mt19937_64 &rng)
{
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < m.size(); ++j)
    m.data()[j] = normal(rng);
  return m;
}

Eigen::MatrixXd orthonormal(Index rows, Index cols, std::mt19937_64 &rng)
{
  return random_matrix(rows, cols, rng).householderQr().householderQ() *
         Eigen::MatrixXd::Identity(rows, cols);
}

struct Desk
{
  geometry::NodeSet nodes = problems::flower_nodes(300, 2);
  geometry::StencilSet stencils = geometry::build_stencils(nodes, 13);
  rbf::ParametricOperator op = problems::helmholtz();
};

} // namespace

TEST(AssembleReduced, IdentityOperator)
{
  // Interior operator = identity, so the compact matrix is I and B = V.
  Eigen::Matrix2Xd interior(2, 3), boundary(2, 3);
  interior << 0, 0.1, 0.2, 0, 0, 0;
  boundary << 1, 0, -1, 0, 1, 0;
  const geometry::NodeSet nodes(interior, boundary);
  rbf::HighFidelitySystem system;
  system.operator_rows.resize(3, 6);
  for (Index i = 0; i < 3; ++i)
    system.operator_rows.insert(i, i) = 1.0;
  system.rhs = Eigen::VectorXd::LinSpaced(6, 1, 6);
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd V = orthonormal(6, 2, rng);
  const ReducedSystem rs = assemble_reduced(system, V);
  EXPECT_EQ(rs.B, V);
  EXPECT_EQ(rs.rhs, system.rhs);
  EXPECT_EQ(assemble_reduced(system, V.leftCols(1)).B.cols(), 1);
  EXPECT_THROW(assemble_reduced(system, Eigen::MatrixXd::Ones(5, 2)), DimensionError);
}

TEST(AssembleReduced, AffineMatchesDirect)
{
  Desk d;
  const ParamVec mu = Eigen::Vector2d(1.0, 1.0);
  const auto system = rbf::assemble_system(d.nodes, d.stencils, rbf::RbfKernel{},
                                           rbf::PolyAugmentation::none(), d.op, mu);
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd V = orthonormal(d.nodes.size(), 20, rng);
  const ReducedSystem direct = assemble_reduced(system, V);
  EXPECT_EQ(direct.B.rows(), d.nodes.size());
  EXPECT_EQ(direct.B.cols(), 20);
  EXPECT_TRUE(direct.B.allFinite());

  const rbf::AffineOperatorRows rows(d.nodes, d.stencils, rbf::RbfKernel{},
                                     rbf::PolyAugmentation::none(), d.op);
  const AffineReducedOperator affine(rows, V);
  const ReducedSystem via_affine = affine.assemble(mu, system.rhs);
  EXPECT_LE((via_affine.B - direct.B).cwiseAbs().maxCoeff(), 1e-9 * direct.B.cwiseAbs().maxCoeff());
}

TEST(SolveLs, SimpleCases)
{
  ReducedSystem rs{Eigen::MatrixXd::Identity(6, 3), Eigen::VectorXd::Unit(6, 0)};
  EXPECT_EQ(solve_reduced_ls(rs), Eigen::VectorXd::Unit(3, 0));

  std::mt19937_64 rng(3);
  const Eigen::MatrixXd Q = orthonormal(30, 4, rng);
  const Eigen::VectorXd rhs = random_matrix(30, 1, rng);
  const Eigen::VectorXd c = solve_reduced_ls({Q, rhs});
  EXPECT_LE((c - Q.transpose() * rhs).norm(), 1e-12 * rhs.norm());
}

TEST(SolveLs, NormalEquationOracleAndOptimality)
{
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd B = random_matrix(50, 5, rng);
  const Eigen::VectorXd rhs = random_matrix(50, 1, rng);
  LsDiagnostics diag;
  const Eigen::VectorXd c = solve_reduced_ls({B, rhs}, {}, &diag);
  const Eigen::VectorXd oracle = (B.transpose() * B).llt().solve(B.transpose() * rhs);
  EXPECT_LE((c - oracle).norm(), 1e-8 * oracle.norm());
  EXPECT_GT(diag.smallest_singular_value, 0.0);
  EXPECT_FALSE(diag.ill_conditioned);

  const double best = (B * c - rhs).norm();
  std::normal_distribution<double> normal;
  for (int k = 0; k < 100; ++k)
  {
    Eigen::VectorXd delta(5);
    for (auto &v : delta)
      v = 1e-3 * normal(rng);
    EXPECT_GE((B * (c + delta) - rhs).norm(), best);
  }
  const Eigen::VectorXd normal_residual = B.transpose() * (B * c - rhs);
  EXPECT_LE(normal_residual.norm(), 1e-8 * B.norm() * rhs.norm());

  const Eigen::VectorXd consistent = B * Eigen::VectorXd::LinSpaced(5, -2, 2);
  const Eigen::VectorXd exact = solve_reduced_ls({B, consistent});
  EXPECT_LE((B * exact - consistent).norm(), 1e-9 * consistent.norm());
}

TEST(SolveLs, RankDeficiencyAndConditioning)
{
  std::mt19937_64 rng(5);
  Eigen::MatrixXd B = random_matrix(20, 3, rng);
  B.col(2) = B.col(0) - 2.0 * B.col(1);
  try
  {
    solve_reduced_ls({B, Eigen::VectorXd::Ones(20)});
    FAIL();
  }
  catch (const SingularSystemError &e)
  {
    EXPECT_NE(std::string(e.what()).find("smallest singular value"), std::string::npos);
  }

  Eigen::MatrixXd nearly = random_matrix(20, 3, rng);
  nearly.col(2) = nearly.col(0) + 1e-9 * random_matrix(20, 1, rng);
  std::vector<std::string> warnings;
  auto previous = log::set_warning_sink([&](const std::string &w) { warnings.push_back(w); });
  LsDiagnostics diag;
  solve_reduced_ls({nearly, Eigen::VectorXd::Ones(20)}, {}, &diag);
  log::set_warning_sink(previous);
  EXPECT_TRUE(diag.ill_conditioned);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(ReducedSolution, Basics)
{
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd V = orthonormal(12, 3, rng);
  EXPECT_TRUE(reduced_solution(V, Eigen::VectorXd::Zero(3)).isZero(0.0));
  EXPECT_EQ(reduced_solution(V, Eigen::VectorXd::Unit(3, 1)), V.col(1));
  EXPECT_THROW(reduced_solution(V, Eigen::VectorXd::Zero(2)), DimensionError);
}

TEST(ReducedSolution, HelmholtzTrainingParameter)
{
  Desk d;
  const auto box = problems::helmholtz_box();
  std::vector<ParamVec> params;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b)
      params.push_back(Eigen::Vector2d(box.lower(0) + (box.upper(0) - box.lower(0)) * a / 5.0,
                                       box.lower(1) + (box.upper(1) - box.lower(1)) * b / 5.0));
  const rbf::AffineOperatorRows rows(d.nodes, d.stencils, rbf::RbfKernel{},
                                     rbf::PolyAugmentation::none(), d.op);
  auto solve = [&](const ParamVec &mu) {
    rbf::HighFidelitySystem system{rows.rows(mu), rbf::assemble_rhs(d.nodes, d.op, mu)};
    return rbf::solve_high_fidelity(system);
  };
  const auto snapshots = pod::build_snapshot_matrix(params, solve);
  const auto basis = pod::compute_pod(snapshots.S, 1e-6);
  const AffineReducedOperator affine(rows, basis.V);
  const ParamVec mu = params[14];
  const Eigen::VectorXd c = solve_reduced_ls(affine.assemble(mu, rbf::assemble_rhs(d.nodes, d.op, mu)));
  const Eigen::VectorXd u = reduced_solution(basis.V, c);
  const Eigen::VectorXd truth = snapshots.S.col(14);
  EXPECT_LE((u - truth).norm() / truth.norm(), 5e-3);
}
