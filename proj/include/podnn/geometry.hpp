// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PODNN_GEOMETRY_HPP
#define PODNN_GEOMETRY_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "podnn/types.hpp"

namespace podnn::geometry
{

// Star-shaped domain whose boundary is r(theta) in polar coordinates around the
// origin. The radius function must be positive and 2*pi periodic; both are
// checked on construction by sampling.
class PolarDomain
{
public:
  PolarDomain(std::function<double(double)> radius_fn, std::string description);

  double radius(double theta) const { return radius_fn_(theta); }
  const std::string &description() const { return description_; }

  // Upper bound of r(theta) over a dense angular sampling.
  double max_radius() const { return max_radius_; }

  // r(theta) = 0.8 + 0.1 (sin 6 theta + sin 3 theta)
  static PolarDomain flower();
  static PolarDomain circle(double radius = 1.0);

private:
  std::function<double(double)> radius_fn_;
  std::string description_;
  double max_radius_ = 0.0;
};

Vec2 boundary_curve(const PolarDomain &domain, double theta);

// True iff |p| < r(atan2(p_y, p_x)) - margin.
bool contains(const PolarDomain &domain, const Vec2 &p, double margin = 0.0);

// Scattered nodes, interior block first. Column i of points() is node i; nodes
// 0..n_interior()-1 are interior and the remaining ones lie on the boundary.
class NodeSet
{
public:
  NodeSet() = default;
  NodeSet(Eigen::Matrix2Xd interior, Eigen::Matrix2Xd boundary);

  Index size() const { return points_.cols(); }
  Index n_interior() const { return n_interior_; }
  Index n_boundary() const { return points_.cols() - n_interior_; }

  const Eigen::Matrix2Xd &points() const { return points_; }
  Vec2 point(Index i) const { return points_.col(i); }
  auto interior() const { return points_.leftCols(n_interior_); }
  auto boundary() const { return points_.rightCols(points_.cols() - n_interior_); }
  bool is_interior(Index i) const { return i < n_interior_; }

  // Provenance recorded with the artifact.
  std::uint64_t seed = 0;
  std::string description;

private:
  Eigen::Matrix2Xd points_;
  Index n_interior_ = 0;
};

struct StencilSet
{
  Index n_loc = 0;
  // stencils[i] lists the n_loc nearest nodes of interior node i, i itself first.
  std::vector<std::vector<Index>> stencils;
};

// radical inverse of index in the given base
double radical_inverse(std::uint64_t index, unsigned base);

// Halton (2,3) points over the domain's bounding box, shifted by a seeded
// Cranley-Patterson rotation, keeping only those strictly inside the domain.
Eigen::Matrix2Xd halton_candidates(const PolarDomain &domain, Index candidate_count,
                                   std::uint64_t seed);

// Greedy farthest-point selection. `fixed` are already selected points (they
// only contribute distances); returns indices into `pool` in selection order.
// Ties go to the lowest pool index.
std::vector<Index> select_farthest_points(const Eigen::Matrix2Xd &pool,
                                          const Eigen::Matrix2Xd &fixed, Index count);

NodeSet generate_nodes(const PolarDomain &domain, Index n_boundary, Index candidate_count,
                       Index target_interior, std::uint64_t seed);

// The n_loc nearest columns of `points` to column `center`, self first, then by
// distance with ties broken by lower index.
std::vector<Index> nearest_stencil(const Eigen::Matrix2Xd &points, Index center, Index n_loc);

StencilSet build_stencils(const NodeSet &nodes, Index n_loc);

} // namespace podnn::geometry

#endif // PODNN_GEOMETRY_HPP
