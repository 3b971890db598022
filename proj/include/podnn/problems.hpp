// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PODNN_PROBLEMS_HPP
#define PODNN_PROBLEMS_HPP

#include <functional>

#include "podnn/rbf_fd.hpp"

namespace podnn::problems
{

// Parameter box D = [lower_1, upper_1] x ... x [lower_p, upper_p].
struct ParamBox
{
  ParamVec lower;
  ParamVec upper;

  Index dim() const { return lower.size(); }
  bool contains(const ParamVec &mu) const;
  // Affine map of the box onto [-1, 1]^p.
  ParamVec normalize(const ParamVec &mu) const;
};

// [0.1, 4] x [0, 2]
ParamBox helmholtz_box();

// -u_xx - mu_1 u_yy - mu_2 u = -10 sin(8 x (y - 1)) in Omega, u = 0 on the boundary.
rbf::ParametricOperator helmholtz();

// Same operator with forcing and boundary data chosen so that `exact` solves
// the problem for every mu. `exact_hessian` returns (u, u_xx, u_yy).
rbf::ParametricOperator helmholtz_manufactured(std::function<Eigen::Vector3d(const Vec2 &)> exact);

// Flower-domain node set with about n_total nodes, keeping the boundary
// share of the 5731 = 5442 + 289 reference set (n_b ~ sqrt(N)). The candidate
// pool holds candidate_factor times the interior target.
geometry::NodeSet flower_nodes(Index n_total, std::uint64_t seed, Index candidate_factor = 8);

// u*(x, y) = sin(x) cos(y) with its second partials.
Eigen::Vector3d sin_cos_solution(const Vec2 &x);

} // namespace podnn::problems

#endif // PODNN_PROBLEMS_HPP
