// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "podnn/pod.hpp"

using namespace podnn;
using namespace podnn::pod;

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

// Oracle singular values from the symmetric eigenproblem of S^T S in long double
// free form: accumulate the Gram matrix, then take square roots.
Eigen::VectorXd gram_singular_values(const Eigen::MatrixXd &S)
{
  const Eigen::MatrixXd gram = S.transpose() * S;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
  return values;
}

} // namespace

TEST(Snapshots, ColumnsFollowParameters)
{
  std::vector<ParamVec> params{Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(0.5, 0.5),
                               Eigen::Vector2d(1.0, 2.0)};
  const auto solver = [](const ParamVec &mu) {
    Eigen::VectorXd u(3);
    u << mu(0), mu(1), mu(0) * mu(1);
    return u;
  };
  const SnapshotMatrix s = build_snapshot_matrix(params, solver);
  ASSERT_EQ(s.S.cols(), 3);
  EXPECT_EQ(s.S.col(0), solver(params[0]));
  EXPECT_EQ(s.S.col(0), s.S.col(2));

  const SnapshotMatrix one = build_snapshot_matrix({params[1]}, solver);
  EXPECT_EQ(one.S.cols(), 1);
  EXPECT_THROW(build_snapshot_matrix({}, solver), ConfigError);
}

TEST(Snapshots, SolverFailureNamesParameter)
{
  const auto failing = [](const ParamVec &mu) -> Eigen::VectorXd {
    if (mu(0) > 1.0)
      throw Error("boom");
    return Eigen::VectorXd::Ones(2);
  };
  try
  {
    build_snapshot_matrix({Eigen::Vector2d(0.5, 0), Eigen::Vector2d(3.5, 0)}, failing);
    FAIL();
  }
  catch (const Error &e)
  {
    EXPECT_NE(std::string(e.what()).find("3.5"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("snapshot 1"), std::string::npos);
  }
}

TEST(Pod, RankOneSymmetric)
{
  const Eigen::MatrixXd S = Eigen::MatrixXd::Ones(2, 2);
  for (double eps : {1e-6, 0.1, 0.9})
  {
    const PodBasis basis = compute_pod(S, eps);
    EXPECT_EQ(basis.n_pod, 1);
    ASSERT_EQ(basis.rank(), 1);
    EXPECT_NEAR(basis.singular_values(0), 2.0, 1e-14);
    EXPECT_NEAR(basis.V(0, 0), 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(basis.V(1, 0), 1.0 / std::sqrt(2.0), 1e-14);
  }
}

TEST(Pod, OrthogonalColumns)
{
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(5, 2);
  S(0, 0) = 3.0;
  S(3, 1) = -4.0;
  const PodBasis basis = compute_pod(S, 1e-8);
  EXPECT_EQ(basis.n_pod, 2);
  EXPECT_NEAR(basis.singular_values(0), 4.0, 1e-14);
  EXPECT_NEAR(basis.singular_values(1), 3.0, 1e-14);
  // Sign convention: largest-magnitude entry positive.
  EXPECT_NEAR(basis.V(3, 0), 1.0, 1e-14);
  EXPECT_NEAR(basis.V(0, 1), 1.0, 1e-14);
}

TEST(Pod, TruncationRule)
{
  Eigen::VectorXd sigma(4);
  sigma << 1.0, 0.1, 0.01, 0.001;
  // tails: after 1 -> 1.0101e-2, after 2 -> 1.01e-4, after 3 -> 1e-6; total 1.010101
  EXPECT_EQ(truncation_rank(sigma, 0.5), 1);
  EXPECT_EQ(truncation_rank(sigma, 0.05), 2);
  EXPECT_EQ(truncation_rank(sigma, 0.005), 3);
  EXPECT_EQ(truncation_rank(sigma, 1e-6), 4);
  EXPECT_THROW(truncation_rank(sigma, 0.0), ConfigError);
  EXPECT_THROW(truncation_rank(sigma, 1.0), ConfigError);

  // Monotone: larger eps never keeps more modes.
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd S = random_matrix(40, 15, rng) * Eigen::VectorXd(random_matrix(15, 1, rng)).asDiagonal().toDenseMatrix();
  Index previous = 1000;
  for (double eps : {1e-6, 1e-4, 1e-2, 0.1, 0.3, 0.6, 0.9})
  {
    const Index n = compute_pod(S, eps).n_pod;
    EXPECT_LE(n, previous);
    previous = n;
  }
}

TEST(Pod, OrthonormalAndMatchesGramOracle)
{
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd S = random_matrix(120, 30, rng);
  const PodBasis basis = compute_pod(S, 1e-3);
  const Eigen::MatrixXd gram = basis.V.transpose() * basis.V;
  EXPECT_LE((gram - Eigen::MatrixXd::Identity(basis.n_pod, basis.n_pod)).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::VectorXd oracle = gram_singular_values(S);
  ASSERT_EQ(basis.rank(), 30);
  EXPECT_LE((basis.singular_values - oracle).cwiseAbs().maxCoeff(), 1e-10 * oracle(0));
  for (Index i = 1; i < basis.rank(); ++i)
    EXPECT_GE(basis.singular_values(i - 1), basis.singular_values(i));
}

TEST(Pod, ZeroSingularValuesExcluded)
{
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd S = random_matrix(30, 3, rng) * random_matrix(3, 10, rng);
  const PodBasis basis = compute_pod(S, 1e-10);
  EXPECT_EQ(basis.rank(), 3);
  EXPECT_EQ(basis.n_pod, 3);
  EXPECT_THROW(compute_pod(Eigen::MatrixXd::Zero(4, 4), 0.1), Error);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(3, 3);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(compute_pod(bad, 0.1), Error);
}

TEST(ProjectionError, FullBasisAndRankTwo)
{
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd S = random_matrix(20, 6, rng);
  const PodBasis full = compute_pod_rank(S, 6);
  EXPECT_LE(projection_error_sq(S, full.V), 1e-24 * S.squaredNorm() + 1e-20);

  // rank 2 with known singular values 5 and 2
  Eigen::MatrixXd q = random_matrix(10, 2, rng).householderQr().householderQ() *
                      Eigen::MatrixXd::Identity(10, 2);
  Eigen::MatrixXd z = random_matrix(4, 2, rng).householderQr().householderQ() *
                      Eigen::MatrixXd::Identity(4, 2);
  const Eigen::MatrixXd rank2 = q * Eigen::Vector2d(5.0, 2.0).asDiagonal() * z.transpose();
  const PodBasis first = compute_pod_rank(rank2, 1);
  EXPECT_NEAR(projection_error_sq(rank2, first.V), 4.0, 1e-12);
}

TEST(ProjectionError, TailIdentityOnRandomMatrices)
{
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial)
  {
    const Index cols = 5 + trial * 4;
    const Index rows = cols + 10 + trial * 15;
    const Eigen::MatrixXd S = random_matrix(rows, cols, rng);
    const PodBasis basis = compute_pod_rank(S, std::min<Index>(5, cols - 1));
    const double tail = basis.discarded_energy();
    EXPECT_NEAR(projection_error_sq(S, basis.V), tail, 1e-8 * tail);
  }
}

TEST(Projection, ProjectAndReconstruct)
{
  std::mt19937_64 rng(6);
  const PodBasis basis = compute_pod_rank(random_matrix(30, 8, rng), 4);
  const Eigen::MatrixXd &V = basis.V;
  const Eigen::VectorXd c = random_matrix(4, 1, rng);
  const Eigen::VectorXd in_span = reconstruct(V, c);
  EXPECT_LE((reconstruct(V, project(V, in_span)) - in_span).norm(), 1e-10 * in_span.norm());

  Eigen::VectorXd orth = random_matrix(30, 1, rng);
  orth -= V * (V.transpose() * orth);
  EXPECT_LE(project(V, orth).norm(), 1e-10 * orth.norm());

  const Eigen::VectorXd u = random_matrix(30, 1, rng);
  const double best = (u - reconstruct(V, project(V, u))).norm();
  for (int k = 0; k < 100; ++k)
    EXPECT_LE(best, (u - V * Eigen::VectorXd(random_matrix(4, 1, rng))).norm());

  EXPECT_THROW(project(V, Eigen::VectorXd::Ones(29)), DimensionError);
  EXPECT_THROW(reconstruct(V, Eigen::VectorXd::Ones(5)), DimensionError);
}

TEST(DecayReport, Shapes)
{
  std::ostringstream out;
  Eigen::MatrixXd rank1 = Eigen::VectorXd::LinSpaced(6, 1, 6) * Eigen::RowVectorXd::Ones(4);
  rank1(0, 0) += 1e-300; // keep the matrix exactly rank one in practice
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(rank1);
  EXPECT_LE(svd.singularValues()(1) / svd.singularValues()(0), 1e-12);

  const Eigen::VectorXd flat = positive_singular_values(2.0 * Eigen::MatrixXd::Identity(5, 3));
  singular_decay_report({{3, flat}}, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index,sigma_ratio,tail_energy,n_s");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 4), "1,1,");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 4), "2,1,");
  std::getline(in, line);
  EXPECT_EQ(line, "3,1,0,3");
}
