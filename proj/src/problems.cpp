// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "podnn/problems.hpp"

#include <algorithm>
#include <cmath>

namespace podnn::problems
{

bool ParamBox::contains(const ParamVec &mu) const
{
  if (mu.size() != dim())
    return false;
  return (mu.array() >= lower.array()).all() && (mu.array() <= upper.array()).all();
}

ParamVec ParamBox::normalize(const ParamVec &mu) const
{
  return (2.0 * (mu - lower).array() / (upper - lower).array() - 1.0).matrix();
}

ParamBox helmholtz_box()
{
  return {Eigen::Vector2d(0.1, 0.0), Eigen::Vector2d(4.0, 2.0)};
}

namespace
{

std::vector<rbf::OperatorTerm> helmholtz_terms()
{
  return {
    {rbf::Derivative::Dxx, -1.0, Eigen::Vector2d::Zero()},
    {rbf::Derivative::Dyy, 0.0, Eigen::Vector2d(-1.0, 0.0)},
    {rbf::Derivative::Value, 0.0, Eigen::Vector2d(0.0, -1.0)},
  };
}

} // namespace

rbf::ParametricOperator helmholtz()
{
  return rbf::ParametricOperator(
    2, helmholtz_terms(),
    [](const Vec2 &x, const ParamVec &) { return -10.0 * std::sin(8.0 * x.x() * (x.y() - 1.0)); },
    [](const Vec2 &, const ParamVec &) { return 0.0; }, "helmholtz");
}

rbf::ParametricOperator helmholtz_manufactured(std::function<Eigen::Vector3d(const Vec2 &)> exact)
{
  auto forcing = [exact](const Vec2 &x, const ParamVec &mu) {
    const Eigen::Vector3d u = exact(x);
    return -u(1) - mu(0) * u(2) - mu(1) * u(0);
  };
  auto boundary = [exact](const Vec2 &x, const ParamVec &) { return exact(x)(0); };
  return rbf::ParametricOperator(2, helmholtz_terms(), forcing, boundary, "helmholtz-manufactured");
}

geometry::NodeSet flower_nodes(Index n_total, std::uint64_t seed, Index candidate_factor)
{
  const Index n_boundary = std::max<Index>(
    3, std::lround(289.0 * std::sqrt(static_cast<double>(n_total) / 5731.0)));
  const Index n_interior = std::max<Index>(0, n_total - n_boundary);
  return geometry::generate_nodes(geometry::PolarDomain::flower(), n_boundary,
                                  candidate_factor * n_interior, n_interior, seed);
}

Eigen::Vector3d sin_cos_solution(const Vec2 &x)
{
  const double u = std::sin(x.x()) * std::cos(x.y());
  return {u, -u, -u};
}

} // namespace podnn::problems
