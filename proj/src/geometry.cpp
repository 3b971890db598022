// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "podnn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <utility>

namespace podnn::geometry
{

namespace
{
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kRadiusSamples = 4096;
} // namespace

PolarDomain::PolarDomain(std::function<double(double)> radius_fn, std::string description)
  : radius_fn_(std::move(radius_fn)), description_(std::move(description))
{
  for (int k = 0; k < kRadiusSamples; ++k)
  {
    const double r = radius_fn_(kTwoPi * k / kRadiusSamples);
    if (!(r > 0.0))
      throw ConfigError("PolarDomain: radius must be positive for all angles");
    max_radius_ = std::max(max_radius_, r);
  }
  if (std::abs(radius_fn_(0.0) - radius_fn_(kTwoPi)) > 1e-12)
    throw ConfigError("PolarDomain: radius function is not 2*pi periodic");
}

PolarDomain PolarDomain::flower()
{
  return PolarDomain(
    [](double t) { return 0.8 + 0.1 * (std::sin(6.0 * t) + std::sin(3.0 * t)); },
    "flower r(t)=0.8+0.1(sin 6t + sin 3t)");
}

PolarDomain PolarDomain::circle(double radius)
{
  return PolarDomain([radius](double) { return radius; },
                     "circle r=" + std::to_string(radius));
}

Vec2 boundary_curve(const PolarDomain &domain, double theta)
{
  const double r = domain.radius(theta);
  return {r * std::cos(theta), r * std::sin(theta)};
}

bool contains(const PolarDomain &domain, const Vec2 &p, double margin)
{
  const double rho = p.norm();
  if (rho == 0.0)
    return domain.radius(0.0) - margin > 0.0;
  double theta = std::atan2(p.y(), p.x());
  if (theta < 0.0)
    theta += kTwoPi;
  return rho < domain.radius(theta) - margin;
}

NodeSet::NodeSet(Eigen::Matrix2Xd interior, Eigen::Matrix2Xd boundary)
  : points_(2, interior.cols() + boundary.cols()), n_interior_(interior.cols())
{
  points_.leftCols(interior.cols()) = interior;
  points_.rightCols(boundary.cols()) = boundary;
}

double radical_inverse(std::uint64_t index, unsigned base)
{
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0)
  {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

Eigen::Matrix2Xd halton_candidates(const PolarDomain &domain, Index candidate_count,
                                   std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double shift_x = unit(rng);
  const double shift_y = unit(rng);
  const double half = domain.max_radius();

  std::vector<Vec2> inside;
  inside.reserve(static_cast<std::size_t>(candidate_count));
  for (Index k = 1; k <= candidate_count; ++k)
  {
    double u = radical_inverse(static_cast<std::uint64_t>(k), 2) + shift_x;
    double v = radical_inverse(static_cast<std::uint64_t>(k), 3) + shift_y;
    u -= std::floor(u);
    v -= std::floor(v);
    const Vec2 p(half * (2.0 * u - 1.0), half * (2.0 * v - 1.0));
    if (contains(domain, p))
      inside.push_back(p);
  }
  Eigen::Matrix2Xd pool(2, static_cast<Index>(inside.size()));
  for (std::size_t j = 0; j < inside.size(); ++j)
    pool.col(static_cast<Index>(j)) = inside[j];
  return pool;
}

std::vector<Index> select_farthest_points(const Eigen::Matrix2Xd &pool,
                                          const Eigen::Matrix2Xd &fixed, Index count)
{
  if (count > pool.cols())
    throw Error("select_farthest_points: requested more points than the pool holds");

  const Index n = pool.cols();
  Eigen::VectorXd min_dist2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (Index f = 0; f < fixed.cols(); ++f)
    min_dist2 = min_dist2.cwiseMin((pool.colwise() - fixed.col(f)).colwise().squaredNorm().transpose());

  std::vector<Index> selected;
  selected.reserve(static_cast<std::size_t>(count));
  for (Index s = 0; s < count; ++s)
  {
    // maxCoeff returns the first maximiser, which is the lowest index.
    Index best = 0;
    const double best_d2 = min_dist2.maxCoeff(&best);
    if (!(best_d2 > 1e-24))
      throw Error("select_farthest_points: pool exhausted (duplicate point would be selected)");
    selected.push_back(best);
    min_dist2 = min_dist2.cwiseMin((pool.colwise() - pool.col(best)).colwise().squaredNorm().transpose());
  }
  return selected;
}

NodeSet generate_nodes(const PolarDomain &domain, Index n_boundary, Index candidate_count,
                       Index target_interior, std::uint64_t seed)
{
  if (n_boundary < 3)
    throw ConfigError("generate_nodes: n_boundary must be at least 3");
  if (candidate_count < target_interior)
    throw ConfigError("generate_nodes: candidate_count must be >= target_interior");

  Eigen::Matrix2Xd boundary(2, n_boundary);
  for (Index k = 0; k < n_boundary; ++k)
    boundary.col(k) = boundary_curve(domain, kTwoPi * static_cast<double>(k) / n_boundary);

  Eigen::Matrix2Xd interior(2, target_interior);
  if (target_interior > 0)
  {
    const Eigen::Matrix2Xd pool = halton_candidates(domain, candidate_count, seed);
    if (pool.cols() < target_interior)
      throw Error("generate_nodes: only " + std::to_string(pool.cols()) +
                  " candidates fall inside the domain, need " +
                  std::to_string(target_interior));
    const auto picked = select_farthest_points(pool, boundary, target_interior);
    for (Index j = 0; j < target_interior; ++j)
      interior.col(j) = pool.col(picked[static_cast<std::size_t>(j)]);
  }

  NodeSet nodes(std::move(interior), std::move(boundary));
  nodes.seed = seed;
  nodes.description = domain.description();
  return nodes;
}

std::vector<Index> nearest_stencil(const Eigen::Matrix2Xd &points, Index center, Index n_loc)
{
  const Index n = points.cols();
  if (n_loc < 1 || n_loc > n)
    throw ConfigError("nearest_stencil: n_loc must lie in [1, N]");

  std::vector<std::pair<double, Index>> order;
  order.reserve(static_cast<std::size_t>(n));
  const Vec2 c = points.col(center);
  for (Index j = 0; j < n; ++j)
    order.emplace_back(j == center ? -1.0 : (points.col(j) - c).squaredNorm(), j);

  std::partial_sort(order.begin(), order.begin() + n_loc, order.end());
  std::vector<Index> stencil(static_cast<std::size_t>(n_loc));
  for (Index k = 0; k < n_loc; ++k)
    stencil[static_cast<std::size_t>(k)] = order[static_cast<std::size_t>(k)].second;
  return stencil;
}

StencilSet build_stencils(const NodeSet &nodes, Index n_loc)
{
  StencilSet set;
  set.n_loc = n_loc;
  set.stencils.resize(static_cast<std::size_t>(nodes.n_interior()));
  for (Index i = 0; i < nodes.n_interior(); ++i)
    set.stencils[static_cast<std::size_t>(i)] = nearest_stencil(nodes.points(), i, n_loc);
  return set;
}

} // namespace podnn::geometry
