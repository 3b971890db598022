// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "podnn/pod.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <sstream>

namespace podnn::pod
{

namespace
{

std::string format_param(const ParamVec &mu)
{
  std::ostringstream s;
  s.precision(17);
  s << '(';
  for (Index j = 0; j < mu.size(); ++j)
    s << (j ? ", " : "") << mu(j);
  s << ')';
  return s.str();
}

void require_finite(const Eigen::MatrixXd &S)
{
  if (S.size() == 0)
    throw DimensionError("snapshot matrix is empty");
  if (!S.allFinite())
    throw Error("snapshot matrix has non-finite entries");
}

Index positive_count(const Eigen::VectorXd &sigma, Index rows, Index cols)
{
  if (sigma.size() == 0 || !(sigma(0) > 0.0))
    return 0;
  const double cutoff =
    sigma(0) * static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
  Index r = 0;
  while (r < sigma.size() && sigma(r) > cutoff)
    ++r;
  return r;
}

PodBasis truncated_basis(const Eigen::MatrixXd &S, Index n_pod, double eps_pod, bool by_tolerance)
{
  require_finite(S);
  const Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(
    S, Eigen::ComputeThinU);
  const Index r = positive_count(svd.singularValues(), S.rows(), S.cols());
  if (r == 0)
    throw Error("snapshot matrix is numerically zero");

  PodBasis basis;
  basis.singular_values = svd.singularValues().head(r);
  basis.tolerance = eps_pod;
  basis.n_pod = by_tolerance ? truncation_rank(basis.singular_values, eps_pod) : n_pod;
  if (basis.n_pod < 1 || basis.n_pod > r)
    throw Error("requested " + std::to_string(basis.n_pod) + " POD modes but the snapshot rank is " +
                std::to_string(r));
  basis.V = svd.matrixU().leftCols(basis.n_pod);
  for (Index k = 0; k < basis.n_pod; ++k)
  {
    Index arg = 0;
    basis.V.col(k).cwiseAbs().maxCoeff(&arg);
    if (basis.V(arg, k) < 0.0)
      basis.V.col(k) *= -1.0;
  }
  return basis;
}

} // namespace

void SnapshotMatrix::validate() const
{
  if (static_cast<std::size_t>(S.cols()) != params.size())
    throw DimensionError("snapshot matrix has " + std::to_string(S.cols()) + " columns for " +
                         std::to_string(params.size()) + " parameters");
  if (!S.allFinite())
    throw Error("snapshot matrix has non-finite entries");
}

SnapshotMatrix build_snapshot_matrix(const std::vector<ParamVec> &params,
                                     const HighFidelitySolver &solver)
{
  if (params.empty())
    throw ConfigError("build_snapshot_matrix: no parameters");
  SnapshotMatrix snapshots;
  snapshots.params = params;
  for (std::size_t j = 0; j < params.size(); ++j)
  {
    Eigen::VectorXd u;
    try
    {
      u = solver(params[j]);
    }
    catch (const std::exception &e)
    {
      throw Error("snapshot " + std::to_string(j) + " at mu = " + format_param(params[j]) +
                  " failed: " + e.what());
    }
    if (j == 0)
      snapshots.S.resize(u.size(), static_cast<Index>(params.size()));
    else if (u.size() != snapshots.S.rows())
      throw DimensionError("snapshot " + std::to_string(j) + " has inconsistent length");
    snapshots.S.col(static_cast<Index>(j)) = u;
  }
  snapshots.validate();
  return snapshots;
}

double PodBasis::discarded_energy() const
{
  return tail_energy(singular_values, n_pod);
}

Eigen::VectorXd positive_singular_values(const Eigen::MatrixXd &S)
{
  require_finite(S);
  const Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(S);
  return svd.singularValues().head(positive_count(svd.singularValues(), S.rows(), S.cols()));
}

double tail_energy(const Eigen::VectorXd &sigma, Index n)
{
  double tail = 0.0;
  for (Index i = sigma.size() - 1; i >= n; --i)
    tail += sigma(i) * sigma(i);
  return tail;
}

Index truncation_rank(const Eigen::VectorXd &sigma, double eps_pod)
{
  if (!(eps_pod > 0.0 && eps_pod < 1.0))
    throw ConfigError("eps_POD must lie in (0, 1)");
  if (sigma.size() == 0)
    return 0;
  const double total = tail_energy(sigma, 0);
  const double allowed = eps_pod * eps_pod * total;
  for (Index n = 1; n <= sigma.size(); ++n)
    if (tail_energy(sigma, n) <= allowed)
      return n;
  return sigma.size();
}

PodBasis compute_pod(const Eigen::MatrixXd &S, double eps_pod)
{
  if (!(eps_pod > 0.0 && eps_pod < 1.0))
    throw ConfigError("eps_POD must lie in (0, 1)");
  return truncated_basis(S, 0, eps_pod, true);
}

PodBasis compute_pod_rank(const Eigen::MatrixXd &S, Index n_pod)
{
  return truncated_basis(S, n_pod, 0.0, false);
}

void singular_decay_report(const std::vector<DecayScenario> &scenarios, std::ostream &out)
{
  out << "index,sigma_ratio,tail_energy,n_s\n";
  out.precision(17);
  for (const auto &scenario : scenarios)
  {
    const Eigen::VectorXd &sigma = scenario.singular_values;
    if (sigma.size() == 0)
      continue;
    const double total = tail_energy(sigma, 0);
    for (Index i = 0; i < sigma.size(); ++i)
      out << i + 1 << ',' << sigma(i) / sigma(0) << ',' << tail_energy(sigma, i + 1) / total << ','
          << scenario.n_s << '\n';
  }
}

} // namespace podnn::pod
