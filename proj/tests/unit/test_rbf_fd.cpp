// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "podnn/problems.hpp"
#include "podnn/rbf_fd.hpp"

using namespace podnn;
using namespace podnn::rbf;

namespace
{

ParamVec mu2(double a, double b)
{
  ParamVec mu(2);
  mu << a, b;
  return mu;
}

// Second-order central differences of the IMQ, independent of kernel_derivative.
double helmholtz_fd(const ParamVec &mu, const Vec2 &c, const Vec2 &x, double eps, double h)
{
  auto phi = [&](double px, double py) {
    const double r2 = (px - c.x()) * (px - c.x()) + (py - c.y()) * (py - c.y());
    return 1.0 / std::sqrt(1.0 + eps * eps * r2);
  };
  const double f0 = phi(x.x(), x.y());
  const double dxx = (phi(x.x() + h, x.y()) - 2 * f0 + phi(x.x() - h, x.y())) / (h * h);
  const double dyy = (phi(x.x(), x.y() + h) - 2 * f0 + phi(x.x(), x.y() - h)) / (h * h);
  return -dxx - mu(0) * dyy - mu(1) * f0;
}

ParametricOperator scaled_mass()
{
  return ParametricOperator(
    2, {{Derivative::Value, 0.0, Eigen::Vector2d(0.0, -1.0)}},
    [](const Vec2 &, const ParamVec &) { return 0.0; },
    [](const Vec2 &, const ParamVec &) { return 0.0; }, "mass");
}

ParametricOperator second_x()
{
  return ParametricOperator(
    1, {{Derivative::Dxx, -1.0, Eigen::VectorXd::Zero(1)}},
    [](const Vec2 &, const ParamVec &) { return 0.0; },
    [](const Vec2 &, const ParamVec &) { return 0.0; }, "-dxx");
}

geometry::NodeSet desk_nodes(Index n, std::uint64_t seed = 1)
{
  return problems::flower_nodes(n, seed);
}

double manufactured_error(Index n)
{
  const auto nodes = desk_nodes(n);
  const auto stencils = geometry::build_stencils(nodes, 13);
  const auto op = problems::helmholtz_manufactured(problems::sin_cos_solution);
  const auto system =
    assemble_system(nodes, stencils, RbfKernel{}, PolyAugmentation::none(), op, mu2(1, 1));
  const Eigen::VectorXd u = solve_high_fidelity(system);
  Eigen::VectorXd exact(nodes.size());
  for (Index i = 0; i < nodes.size(); ++i)
    exact(i) = problems::sin_cos_solution(nodes.point(i))(0);
  return (u - exact).norm() / exact.norm();
}

} // namespace

TEST(Imq, Values)
{
  EXPECT_EQ(imq_eval(3.0, 0.0), 1.0);
  EXPECT_NEAR(imq_eval(3.0, 1.0), 1.0 / std::sqrt(10.0), 1e-15);
  EXPECT_NEAR(imq_eval(1.0, 1.0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(HelmholtzApply, AtCenter)
{
  const Vec2 c(0.2, -0.1);
  for (double eps : {0.5, 1.0, 3.0})
  {
    EXPECT_NEAR(helmholtz_apply_imq(mu2(1, 0), c, c, eps), 2 * eps * eps, 1e-12);
    EXPECT_NEAR(helmholtz_apply_imq(mu2(0, 1), c, c, eps), eps * eps - 1.0, 1e-12);
  }
}

TEST(HelmholtzApply, MatchesFiniteDifferences)
{
  const Vec2 c(0.0, 0.0);
  const double exact = helmholtz_apply_imq(mu2(1, 1), c, Vec2(0.1, 0.0), 3.0);
  EXPECT_NEAR(helmholtz_fd(mu2(1, 1), c, Vec2(0.1, 0.0), 3.0, 1e-4), exact,
              1e-6 * std::abs(exact));

  std::mt19937 rng(123);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int probe = 0; probe < 100; ++probe)
  {
    const Vec2 center(u(rng), u(rng));
    const Vec2 x = center + 0.3 * Vec2(u(rng), u(rng));
    const ParamVec mu = mu2(0.1 + 1.95 * (u(rng) + 1), 1 + u(rng));
    const double a = helmholtz_apply_imq(mu, center, x, 3.0);
    const double scale = std::abs(helmholtz_fd(mu2(0, 0), center, x, 3.0, 1e-4)) +
                         mu(0) * std::abs(helmholtz_fd(mu2(1, 0), center, x, 3.0, 1e-4) -
                                          helmholtz_fd(mu2(0, 0), center, x, 3.0, 1e-4)) +
                         mu(1) * imq_eval(3.0, (x - center).norm());
    EXPECT_LE(std::abs(a - helmholtz_fd(mu, center, x, 3.0, 1e-4)), 1e-6 * scale);
  }
}

TEST(ParametricOperator, SelfCheckAndAffineParts)
{
  const auto op = problems::helmholtz();
  EXPECT_LE(op.finite_difference_check(RbfKernel{}, 100, 1e-4, 99u), 1e-6);
  ASSERT_EQ(op.affine_size(), 3);
  const ParamVec mu = mu2(1.7, 0.4);
  const auto theta = op.affine_coefficients(mu);
  const Vec2 c(0.1, 0.2), x(0.15, 0.1);
  double sum = 0.0;
  for (Index k = 0; k < 3; ++k)
    sum += theta[static_cast<std::size_t>(k)] *
           op.affine_component(k).apply_to_kernel(RbfKernel{}, c, x, mu2(0, 0));
  EXPECT_NEAR(sum, op.apply_to_kernel(RbfKernel{}, c, x, mu), 1e-12);
  EXPECT_NEAR(op.apply_to_kernel(RbfKernel{}, c, x, mu), helmholtz_apply_imq(mu, c, x, 3.0), 1e-12);
}

TEST(LocalInterp, SmallCases)
{
  Eigen::Matrix2Xd one(2, 1);
  one << 0.3, 0.4;
  EXPECT_EQ(local_interp_matrix(one, RbfKernel{}, PolyAugmentation::none()),
            Eigen::MatrixXd::Ones(1, 1));

  Eigen::Matrix2Xd two(2, 2);
  two << 0, 1, 0, 0;
  const Eigen::MatrixXd a = local_interp_matrix(two, RbfKernel{KernelKind::IMQ, 1.0, 0},
                                                PolyAugmentation::none());
  EXPECT_EQ(a(0, 0), 1.0);
  EXPECT_EQ(a(1, 1), 1.0);
  EXPECT_NEAR(a(0, 1), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(a(0, 1), a(1, 0));

  Eigen::Matrix2Xd three(2, 3);
  three << 0, 1, 0, 0, 0, 1;
  const auto aug = PolyAugmentation::total_degree(1);
  ASSERT_EQ(aug.size(), 3);
  const Eigen::MatrixXd m = local_interp_matrix(three, RbfKernel{}, aug);
  ASSERT_EQ(m.rows(), 6);
  EXPECT_TRUE((m.array() == m.transpose().array()).all());
  EXPECT_TRUE(m.bottomRightCorner(3, 3).isZero(0.0));
  // Oracle: P_jk = p_k(x_j) with p = (1, x, y).
  for (Index j = 0; j < 3; ++j)
  {
    EXPECT_EQ(m(j, 3), 1.0);
    EXPECT_EQ(m(j, 4), three(0, j));
    EXPECT_EQ(m(j, 5), three(1, j));
    for (Index k = 0; k < 3; ++k)
      EXPECT_EQ(m(j, k), imq_eval(3.0, (three.col(j) - three.col(k)).norm()));
  }
}

TEST(StencilWeights, ThreePointSecondDifference)
{
  const double h = 0.1;
  Eigen::Matrix2Xd pts(2, 3);
  pts << 0.0, -h, h, 0, 0, 0;
  const Eigen::VectorXd w = stencil_weights(pts, RbfKernel{}, PolyAugmentation::univariate(2),
                                            second_x(), Eigen::VectorXd::Zero(1));
  EXPECT_NEAR(w(0), 2.0 / (h * h), 1e-8);
  EXPECT_NEAR(w(1), -1.0 / (h * h), 1e-8);
  EXPECT_NEAR(w(2), -1.0 / (h * h), 1e-8);
}

TEST(StencilWeights, MassOperatorSinglePoint)
{
  Eigen::Matrix2Xd pts(2, 1);
  pts << 0.2, 0.2;
  const Eigen::VectorXd w =
    stencil_weights(pts, RbfKernel{}, PolyAugmentation::none(), scaled_mass(), mu2(0.3, 1.25));
  EXPECT_NEAR(w(0), -1.25, 1e-15);

  // Larger stencil: A w = -mu_2 Phi(center row), i.e. w = -mu_2 e_0.
  const auto nodes = desk_nodes(200);
  const auto stencil = geometry::nearest_stencil(nodes.points(), 5, 13);
  Eigen::Matrix2Xd local(2, 13);
  for (Index j = 0; j < 13; ++j)
    local.col(j) = nodes.point(stencil[static_cast<std::size_t>(j)]);
  const Eigen::VectorXd w13 =
    stencil_weights(local, RbfKernel{}, PolyAugmentation::none(), scaled_mass(), mu2(0.3, 1.25));
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(13);
  expected(0) = -1.25;
  EXPECT_LE((w13 - expected).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(StencilWeights, ReproduceInterpolantDerivative)
{
  const auto nodes = desk_nodes(400);
  const auto op = problems::helmholtz();
  std::mt19937 rng(5);
  std::normal_distribution<double> normal;
  for (Index center : {0, 17, 123})
  {
    const auto stencil = geometry::nearest_stencil(nodes.points(), center, 13);
    Eigen::Matrix2Xd local(2, 13);
    for (Index j = 0; j < 13; ++j)
      local.col(j) = nodes.point(stencil[static_cast<std::size_t>(j)]);
    const Eigen::VectorXd w =
      stencil_weights(local, RbfKernel{}, PolyAugmentation::none(), op, mu2(1, 1));

    Eigen::VectorXd data(13);
    for (auto &v : data)
      v = normal(rng);
    // Oracle: interpolate, then differentiate the interpolant in closed form.
    Eigen::MatrixXd a(13, 13);
    for (Index j = 0; j < 13; ++j)
      for (Index k = 0; k < 13; ++k)
        a(j, k) = imq_eval(3.0, (local.col(j) - local.col(k)).norm());
    const Eigen::VectorXd lambda = a.fullPivLu().solve(data);
    double lu = 0.0;
    for (Index j = 0; j < 13; ++j)
      lu += lambda(j) * helmholtz_apply_imq(mu2(1, 1), local.col(j), local.col(0), 3.0);
    EXPECT_NEAR(w.dot(data), lu, 1e-8 * std::max(1.0, std::abs(lu)));
  }
}

TEST(StencilWeights, PolynomialReproduction)
{
  const auto nodes = desk_nodes(300);
  const auto op = problems::helmholtz();
  const auto aug = PolyAugmentation::total_degree(2);
  const ParamVec mu = mu2(2.5, 1.5);
  const auto stencil = geometry::nearest_stencil(nodes.points(), 3, 15);
  Eigen::Matrix2Xd local(2, 15);
  for (Index j = 0; j < 15; ++j)
    local.col(j) = nodes.point(stencil[static_cast<std::size_t>(j)]);
  const Eigen::VectorXd w = stencil_weights(local, RbfKernel{}, aug, op, mu);
  for (const Monomial &p : aug.terms)
  {
    double applied = 0.0;
    for (Index j = 0; j < 15; ++j)
      applied += w(j) * monomial_derivative(p, Derivative::Value, local.col(j));
    const double exact = op.apply_to_poly(p, local.col(0), mu);
    EXPECT_NEAR(applied, exact, 1e-9 * std::max(1.0, std::abs(exact)));
  }
}

TEST(StencilWeights, DuplicatePointsAreSingular)
{
  Eigen::Matrix2Xd pts(2, 3);
  pts << 0.1, 0.2, 0.2, 0.0, 0.1, 0.1;
  EXPECT_THROW(
    stencil_weights(pts, RbfKernel{}, PolyAugmentation::none(), problems::helmholtz(), mu2(1, 1)),
    SingularSystemError);

  Eigen::Matrix2Xd interior(2, 1), boundary(2, 2);
  interior << 0.1, 0.0;
  boundary << 0.5, 0.5, 0.0, 0.0;
  const geometry::NodeSet nodes(interior, boundary);
  try
  {
    assemble_system(nodes, geometry::build_stencils(nodes, 3), RbfKernel{},
                    PolyAugmentation::none(), problems::helmholtz(), mu2(1, 1));
    FAIL() << "expected SingularSystemError";
  }
  catch (const SingularSystemError &e)
  {
    EXPECT_EQ(e.where(), 0);
  }
}

TEST(Assemble, BoundaryOnlyIsIdentity)
{
  const auto nodes = geometry::generate_nodes(geometry::PolarDomain::flower(), 12, 0, 0, 1);
  const auto op = problems::helmholtz_manufactured(problems::sin_cos_solution);
  const auto system = assemble_system(nodes, geometry::build_stencils(nodes, 1), RbfKernel{},
                                      PolyAugmentation::none(), op, mu2(1, 1));
  EXPECT_EQ(system.n_interior(), 0);
  EXPECT_TRUE(Eigen::MatrixXd(system.full_matrix()).isIdentity(0.0));
  const Eigen::VectorXd u = solve_high_fidelity(system);
  EXPECT_EQ(u, system.rhs);
  for (Index b = 0; b < 12; ++b)
    EXPECT_EQ(system.rhs(b), problems::sin_cos_solution(nodes.point(b))(0));
}

TEST(Assemble, SingleInteriorRow)
{
  const auto nodes = geometry::generate_nodes(geometry::PolarDomain::circle(1.0), 6, 500, 1, 2);
  const auto op = problems::helmholtz();
  const auto stencils = geometry::build_stencils(nodes, 7);
  const auto system =
    assemble_system(nodes, stencils, RbfKernel{}, PolyAugmentation::none(), op, mu2(1, 1));
  Eigen::Matrix2Xd local(2, 7);
  for (Index j = 0; j < 7; ++j)
    local.col(j) = nodes.point(stencils.stencils[0][static_cast<std::size_t>(j)]);
  const Eigen::VectorXd w = stencil_weights(local, RbfKernel{}, PolyAugmentation::none(), op, mu2(1, 1));
  const Eigen::MatrixXd full = system.full_matrix();
  for (Index j = 0; j < 7; ++j)
    EXPECT_EQ(full(0, stencils.stencils[0][static_cast<std::size_t>(j)]), w(j));
  EXPECT_TRUE(full.bottomRightCorner(6, 6).isIdentity(0.0));
  EXPECT_TRUE(full.bottomLeftCorner(6, 1).isZero(0.0));
  EXPECT_EQ(system.rhs(0), op.forcing(nodes.point(0), mu2(1, 1)));
}

TEST(Assemble, SparsityAndAffineConsistency)
{
  const auto nodes = desk_nodes(200);
  const auto stencils = geometry::build_stencils(nodes, 13);
  const auto op = problems::helmholtz();
  const ParamVec mu = mu2(3.1, 0.7);
  const auto system = assemble_system(nodes, stencils, RbfKernel{}, PolyAugmentation::none(), op, mu);
  for (Index i = 0; i < system.n_interior(); ++i)
  {
    Index count = 0;
    for (SparseRowMatrix::InnerIterator it(system.operator_rows, i); it; ++it)
    {
      ++count;
      const auto &s = stencils.stencils[static_cast<std::size_t>(i)];
      EXPECT_NE(std::find(s.begin(), s.end(), it.col()), s.end());
    }
    EXPECT_LE(count, 13);
  }
  const AffineOperatorRows affine(nodes, stencils, RbfKernel{}, PolyAugmentation::none(), op);
  const Eigen::MatrixXd diff = Eigen::MatrixXd(affine.rows(mu)) - Eigen::MatrixXd(system.operator_rows);
  EXPECT_LE(diff.cwiseAbs().maxCoeff(), 1e-9 * Eigen::MatrixXd(system.operator_rows).cwiseAbs().maxCoeff());
}

TEST(Solve, IdentityAndBoundaryExactness)
{
  const auto nodes = desk_nodes(300);
  const auto op = problems::helmholtz_manufactured(problems::sin_cos_solution);
  const auto system = assemble_system(nodes, geometry::build_stencils(nodes, 13), RbfKernel{},
                                      PolyAugmentation::none(), op, mu2(1, 1));
  SolveDiagnostics diag;
  const Eigen::VectorXd u = solve_high_fidelity(system, {}, &diag);
  for (Index b = nodes.n_interior(); b < nodes.size(); ++b)
    EXPECT_EQ(u(b), system.rhs(b));
  EXPECT_GT(diag.condition_estimate, 1.0);
  EXPECT_FALSE(diag.ill_conditioned);
  const Eigen::VectorXd residual = system.apply(u) - system.rhs;
  EXPECT_LE(residual.norm(), 1e-9 * system.rhs.norm());

  SolveDiagnostics strict;
  solve_high_fidelity(system, {true, 1.0}, &strict);
  EXPECT_TRUE(strict.ill_conditioned);
}

TEST(Solve, ManufacturedSolutionConverges)
{
  const double e400 = manufactured_error(400);
  const double e800 = manufactured_error(800);
  const double e1600 = manufactured_error(1600);
  EXPECT_LE(e800, 1e-2);
  EXPECT_LT(e800, e400);
  EXPECT_LT(e1600, e800);
}

TEST(Export, TripletCsv)
{
  Eigen::Matrix2Xd interior(2, 1), boundary(2, 3);
  interior << 0.0, 0.0;
  boundary << 0.5, -0.5, 0.0, 0.0, 0.5, -0.5;
  const geometry::NodeSet nodes(interior, boundary);
  const auto system = assemble_system(nodes, geometry::build_stencils(nodes, 4), RbfKernel{},
                                      PolyAugmentation::none(), problems::helmholtz(), mu2(1, 1));
  std::ostringstream out;
  export_triplets(system, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "row,col,value");
  int rows = 0;
  while (std::getline(in, line))
    ++rows;
  EXPECT_EQ(rows, 4 + 3);
}
