// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PODNN_POD_HPP
#define PODNN_POD_HPP

#include <functional>
#include <iosfwd>
#include <vector>

#include "podnn/types.hpp"

namespace podnn::pod
{

struct SnapshotMatrix
{
  Eigen::MatrixXd S;              // N x n_s, column j solves for params[j]
  std::vector<ParamVec> params;

  Index n_snapshots() const { return S.cols(); }
  // Throws if the column count differs from params or an entry is not finite.
  void validate() const;
};

using HighFidelitySolver = std::function<Eigen::VectorXd(const ParamVec &)>;

// Column j = solver(params[j]). A failing solve is rethrown with the offending
// parameter in the message.
SnapshotMatrix build_snapshot_matrix(const std::vector<ParamVec> &params,
                                     const HighFidelitySolver &solver);

struct PodBasis
{
  Eigen::MatrixXd V;               // N x n_pod, orthonormal columns
  Eigen::VectorXd singular_values; // the r strictly positive singular values
  Index n_pod = 0;
  double tolerance = 0.0;          // eps_POD; 0 when the rank was fixed

  Index rank() const { return singular_values.size(); }
  // sum_{i > n_pod} sigma_i^2
  double discarded_energy() const;
};

// Strictly positive singular values of S, non-increasing. Values below
// sigma_1 * max(N, n_s) * machine epsilon count as zero and are dropped.
Eigen::VectorXd positive_singular_values(const Eigen::MatrixXd &S);

// min { n : sum_{i<=n} sigma_i^2 / sum_i sigma_i^2 >= 1 - eps^2 }, evaluated on
// the tail sum to avoid cancellation.
Index truncation_rank(const Eigen::VectorXd &sigma, double eps_pod);

// sum_{i > n} sigma_i^2, accumulated from the smallest value upwards.
double tail_energy(const Eigen::VectorXd &sigma, Index n);

// Thin SVD S = U Sigma Z^T by one-sided Jacobi with QR preconditioning; V holds
// the leading left singular vectors with the largest-magnitude entry of each
// made positive.
PodBasis compute_pod(const Eigen::MatrixXd &S, double eps_pod);
PodBasis compute_pod_rank(const Eigen::MatrixXd &S, Index n_pod);

// V^T u
template <typename DerivedV, typename DerivedU>
Eigen::VectorXd project(const Eigen::MatrixBase<DerivedV> &V, const Eigen::MatrixBase<DerivedU> &u)
{
  if (V.rows() != u.rows())
    throw DimensionError("project: basis has " + std::to_string(V.rows()) + " rows, vector has " +
                         std::to_string(u.rows()));
  return V.transpose() * u;
}

// V c
template <typename DerivedV, typename DerivedC>
Eigen::VectorXd reconstruct(const Eigen::MatrixBase<DerivedV> &V,
                            const Eigen::MatrixBase<DerivedC> &c)
{
  if (V.cols() != c.rows())
    throw DimensionError("reconstruct: basis has " + std::to_string(V.cols()) +
                         " columns, coefficients have " + std::to_string(c.rows()));
  return V * c;
}

// sum_j || S_j - V V^T S_j ||^2
template <typename DerivedS, typename DerivedV>
double projection_error_sq(const Eigen::MatrixBase<DerivedS> &S, const Eigen::MatrixBase<DerivedV> &V)
{
  if (V.rows() != S.rows())
    throw DimensionError("projection_error_sq: row mismatch");
  return (S - V * (V.transpose() * S)).squaredNorm();
}

struct DecayScenario
{
  Index n_s = 0;
  Eigen::VectorXd singular_values;
};

// CSV with header index,sigma_ratio,tail_energy,n_s. sigma_ratio = sigma_i /
// sigma_1 and tail_energy = sum_{j > i} sigma_j^2 / sum_j sigma_j^2 (1-based i).
void singular_decay_report(const std::vector<DecayScenario> &scenarios, std::ostream &out);

} // namespace podnn::pod

#endif // PODNN_POD_HPP
