// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "podnn/rom.hpp"

#include <limits>
#include <sstream>

#include "podnn/log.hpp"

namespace podnn::rom
{

ReducedSystem assemble_reduced(const rbf::HighFidelitySystem &system, const Eigen::MatrixXd &V)
{
  if (V.rows() != system.size())
    throw DimensionError("assemble_reduced: basis has " + std::to_string(V.rows()) +
                         " rows, system has N = " + std::to_string(system.size()));
  return {system.apply(V), system.rhs};
}

AffineReducedOperator::AffineReducedOperator(const rbf::AffineOperatorRows &rows,
                                             const Eigen::MatrixXd &V)
{
  const auto &parts = rows.components();
  const Index n = V.rows();
  for (std::size_t k = 0; k < parts.size(); ++k)
  {
    if (parts[k].cols() != n)
      throw DimensionError("AffineReducedOperator: basis does not conform to the operator");
    const Index ni = parts[k].rows();
    Eigen::MatrixXd block(n, V.cols());
    block.topRows(ni) = parts[k] * V;
    if (k == 0)
      block.bottomRows(n - ni) = V.bottomRows(n - ni);
    else
      block.bottomRows(n - ni).setZero();
    components_.push_back(std::move(block));
  }
}

Eigen::MatrixXd AffineReducedOperator::operator()(const ParamVec &mu) const
{
  if (mu.size() != param_dim())
    throw DimensionError("AffineReducedOperator: parameter dimension mismatch");
  Eigen::MatrixXd b = components_[0];
  for (Index j = 0; j < mu.size(); ++j)
    b.noalias() += mu(j) * components_[static_cast<std::size_t>(j + 1)];
  return b;
}

ReducedSystem AffineReducedOperator::assemble(const ParamVec &mu, Eigen::VectorXd rhs) const
{
  if (rhs.size() != components_[0].rows())
    throw DimensionError("AffineReducedOperator: rhs length mismatch");
  return {(*this)(mu), std::move(rhs)};
}

Eigen::VectorXd solve_reduced_ls(const ReducedSystem &rs, const LsOptions &options,
                                 LsDiagnostics *diagnostics)
{
  if (rs.B.rows() != rs.rhs.size())
    throw DimensionError("solve_reduced_ls: B has " + std::to_string(rs.B.rows()) +
                         " rows, rhs has " + std::to_string(rs.rhs.size()));
  if (rs.B.cols() == 0 || rs.B.rows() < rs.B.cols())
    throw DimensionError("solve_reduced_ls: B must be tall with at least one column");

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(rs.B);
  // R shares the singular values of B (Q orthogonal, P a permutation).
  const Eigen::MatrixXd r =
    qr.matrixR().topRows(rs.B.cols()).template triangularView<Eigen::Upper>();
  const Eigen::VectorXd sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
  const double largest = sigma(0);
  const double smallest = sigma(sigma.size() - 1);

  LsDiagnostics diag;
  diag.largest_singular_value = largest;
  diag.smallest_singular_value = smallest;
  diag.condition = smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
  diag.ill_conditioned = diag.condition > options.condition_warning;
  if (diagnostics != nullptr)
    *diagnostics = diag;

  if (!(smallest > options.rank_tolerance * largest))
  {
    std::ostringstream msg;
    msg << "reduced operator is rank deficient: smallest singular value " << smallest
        << ", largest " << largest;
    throw SingularSystemError(msg.str(), sigma.size() - 1);
  }
  if (diag.ill_conditioned)
  {
    std::ostringstream msg;
    msg << "reduced operator condition number " << diag.condition << " exceeds "
        << options.condition_warning;
    log::warn(msg.str());
  }
  return qr.solve(rs.rhs);
}

Eigen::VectorXd reduced_solution(const Eigen::MatrixXd &V, const Eigen::VectorXd &c)
{
  if (V.cols() != c.size())
    throw DimensionError("reduced_solution: coefficient length mismatch");
  return V * c;
}

} // namespace podnn::rom
