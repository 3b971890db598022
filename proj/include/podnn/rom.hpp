// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PODNN_ROM_HPP
#define PODNN_ROM_HPP

#include <vector>

#include "podnn/rbf_fd.hpp"

namespace podnn::rom
{

// B_mu = (compact operator) V, i.e. interior rows L(mu) V and boundary rows V_B,
// with the stacked right-hand side (f(mu); g(mu)).
struct ReducedSystem
{
  Eigen::MatrixXd B;
  Eigen::VectorXd rhs;

  Index n_pod() const { return B.cols(); }
};

ReducedSystem assemble_reduced(const rbf::HighFidelitySystem &system, const Eigen::MatrixXd &V);

// Affine reduced operator B(mu) = B_0 + sum_j mu_j B_j with B_k = L_k V for the
// interior rows; the boundary rows V_B belong to B_0 only.
class AffineReducedOperator
{
public:
  AffineReducedOperator(const rbf::AffineOperatorRows &rows, const Eigen::MatrixXd &V);

  Eigen::MatrixXd operator()(const ParamVec &mu) const;
  ReducedSystem assemble(const ParamVec &mu, Eigen::VectorXd rhs) const;

  // Full N x n_pod blocks B_0, B_1, ..., B_p.
  const std::vector<Eigen::MatrixXd> &components() const { return components_; }
  Index param_dim() const { return static_cast<Index>(components_.size()) - 1; }

private:
  std::vector<Eigen::MatrixXd> components_;
};

struct LsDiagnostics
{
  double largest_singular_value = 0.0;
  double smallest_singular_value = 0.0;
  double condition = 0.0;
  bool ill_conditioned = false;
};

struct LsOptions
{
  double rank_tolerance = 1e-10;    // relative to the largest singular value
  double condition_warning = 1e8;
};

// argmin_c || B c - rhs ||_2 via column-pivoted QR. Throws SingularSystemError
// when sigma_min <= rank_tolerance * sigma_max; warns above condition_warning.
Eigen::VectorXd solve_reduced_ls(const ReducedSystem &rs, const LsOptions &options = {},
                                 LsDiagnostics *diagnostics = nullptr);

// V c
Eigen::VectorXd reduced_solution(const Eigen::MatrixXd &V, const Eigen::VectorXd &c);

} // namespace podnn::rom

#endif // PODNN_ROM_HPP
