// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "podnn/rbf_fd.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <Eigen/SparseLU>

namespace podnn::rbf
{

namespace
{

double int_pow(double base, int exponent)
{
  double result = 1.0;
  for (int k = 0; k < exponent; ++k)
    result *= base;
  return result;
}

// d^a/dx^a x^n evaluated at x, for a <= 2.
double monomial_factor(int n, int order, double x)
{
  if (order > n)
    return 0.0;
  switch (order)
  {
  case 0:
    return int_pow(x, n);
  case 1:
    return n * int_pow(x, n - 1);
  default:
    return n * (n - 1) * int_pow(x, n - 2);
  }
}

std::pair<int, int> derivative_orders(Derivative d)
{
  switch (d)
  {
  case Derivative::Value:
    return {0, 0};
  case Derivative::Dx:
    return {1, 0};
  case Derivative::Dy:
    return {0, 1};
  case Derivative::Dxx:
    return {2, 0};
  case Derivative::Dyy:
    return {0, 2};
  case Derivative::Dxy:
    return {1, 1};
  }
  return {0, 0};
}

double kernel_value(const RbfKernel &kernel, const Vec2 &center, const Vec2 &x)
{
  return imq_eval(kernel.shape, (x - center).norm());
}

double finite_difference(const RbfKernel &kernel, Derivative d, const Vec2 &c, const Vec2 &x,
                         double h)
{
  const Vec2 ex(h, 0.0), ey(0.0, h);
  auto phi = [&](const Vec2 &p) { return kernel_value(kernel, c, p); };
  switch (d)
  {
  case Derivative::Value:
    return phi(x);
  case Derivative::Dx:
    return (phi(x + ex) - phi(x - ex)) / (2 * h);
  case Derivative::Dy:
    return (phi(x + ey) - phi(x - ey)) / (2 * h);
  case Derivative::Dxx:
    return (phi(x + ex) - 2 * phi(x) + phi(x - ex)) / (h * h);
  case Derivative::Dyy:
    return (phi(x + ey) - 2 * phi(x) + phi(x - ey)) / (h * h);
  case Derivative::Dxy:
    return (phi(x + ex + ey) - phi(x + ex - ey) - phi(x - ex + ey) + phi(x - ex - ey)) /
           (4 * h * h);
  }
  return 0.0;
}

void check_pivots(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> &qr, Index where)
{
  const Eigen::VectorXd pivots = qr.matrixR().diagonal().cwiseAbs();
  const double largest = pivots.maxCoeff();
  if (!(pivots.minCoeff() >= 1e-12 * largest) || !(largest > 0.0))
    throw SingularSystemError("local interpolation matrix is singular (non-unisolvent or "
                              "duplicate stencil points)",
                              where);
}

Eigen::MatrixXd local_rhs(const Eigen::Matrix2Xd &points, const RbfKernel &kernel,
                          const PolyAugmentation &aug,
                          const std::vector<const ParametricOperator *> &operators,
                          const ParamVec &mu, Index center)
{
  const Index n = points.cols();
  const Index q = aug.size();
  Eigen::MatrixXd rhs(n + q, static_cast<Index>(operators.size()));
  const Vec2 xc = points.col(center);
  for (std::size_t o = 0; o < operators.size(); ++o)
  {
    const auto &op = *operators[o];
    for (Index j = 0; j < n; ++j)
      rhs(j, static_cast<Index>(o)) = op.apply_to_kernel(kernel, points.col(j), xc, mu);
    for (Index k = 0; k < q; ++k)
      rhs(n + k, static_cast<Index>(o)) =
        op.apply_to_poly(aug.terms[static_cast<std::size_t>(k)], xc, mu);
  }
  return rhs;
}

SparseRowMatrix from_triplets(Index rows, Index cols, const std::vector<Triplet> &triplets)
{
  SparseRowMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.prune([](Index, Index, const double &v) { return v != 0.0; });
  m.makeCompressed();
  return m;
}

} // namespace

PolyAugmentation PolyAugmentation::total_degree(int degree)
{
  PolyAugmentation aug;
  for (int d = 0; d <= degree; ++d)
    for (int py = 0; py <= d; ++py)
      aug.terms.push_back({d - py, py});
  return aug;
}

PolyAugmentation PolyAugmentation::univariate(int degree)
{
  PolyAugmentation aug;
  for (int d = 0; d <= degree; ++d)
    aug.terms.push_back({d, 0});
  return aug;
}

double kernel_derivative(const RbfKernel &kernel, Derivative d, const Vec2 &center,
                         const Vec2 &x)
{
  const double e2 = kernel.shape * kernel.shape;
  const double dx = x.x() - center.x();
  const double dy = x.y() - center.y();
  const double s = 1.0 + e2 * (dx * dx + dy * dy);
  const double s12 = 1.0 / std::sqrt(s);
  const double s32 = s12 / s;
  const double s52 = s32 / s;
  switch (d)
  {
  case Derivative::Value:
    return s12;
  case Derivative::Dx:
    return -e2 * dx * s32;
  case Derivative::Dy:
    return -e2 * dy * s32;
  case Derivative::Dxx:
    return -e2 * s32 + 3.0 * e2 * e2 * dx * dx * s52;
  case Derivative::Dyy:
    return -e2 * s32 + 3.0 * e2 * e2 * dy * dy * s52;
  case Derivative::Dxy:
    return 3.0 * e2 * e2 * dx * dy * s52;
  }
  return 0.0;
}

double monomial_derivative(const Monomial &p, Derivative d, const Vec2 &x)
{
  const auto [ox, oy] = derivative_orders(d);
  return monomial_factor(p.px, ox, x.x()) * monomial_factor(p.py, oy, x.y());
}

double helmholtz_apply_imq(const ParamVec &mu, const Vec2 &center, const Vec2 &x, double eps)
{
  const RbfKernel kernel{KernelKind::IMQ, eps, 0};
  return -kernel_derivative(kernel, Derivative::Dxx, center, x) -
         mu(0) * kernel_derivative(kernel, Derivative::Dyy, center, x) -
         mu(1) * kernel_derivative(kernel, Derivative::Value, center, x);
}

ParametricOperator::ParametricOperator(Index param_dim, std::vector<OperatorTerm> terms,
                                       Field forcing, Field boundary, std::string name,
                                       bool self_check)
  : param_dim_(param_dim), terms_(std::move(terms)), forcing_(std::move(forcing)),
    boundary_(std::move(boundary)), name_(std::move(name))
{
  for (auto &t : terms_)
  {
    if (t.linear.size() == 0)
      t.linear = Eigen::VectorXd::Zero(param_dim_);
    if (t.linear.size() != param_dim_)
      throw DimensionError("ParametricOperator: coefficient dimension does not match p");
  }
  if (self_check)
  {
    const double mismatch = finite_difference_check(RbfKernel{}, 20, 1e-4, 7u);
    if (!(mismatch <= 1e-6))
      throw Error("ParametricOperator '" + name_ +
                  "': closed-form kernel application disagrees with finite differences");
  }
}

double ParametricOperator::coefficient(std::size_t term, const ParamVec &mu) const
{
  const auto &t = terms_[term];
  return t.constant + t.linear.dot(mu);
}

double ParametricOperator::apply_to_kernel(const RbfKernel &kernel, const Vec2 &center,
                                           const Vec2 &x, const ParamVec &mu) const
{
  double value = 0.0;
  for (std::size_t t = 0; t < terms_.size(); ++t)
  {
    const double c = coefficient(t, mu);
    if (c != 0.0)
      value += c * kernel_derivative(kernel, terms_[t].derivative, center, x);
  }
  return value;
}

double ParametricOperator::apply_to_poly(const Monomial &p, const Vec2 &x,
                                         const ParamVec &mu) const
{
  double value = 0.0;
  for (std::size_t t = 0; t < terms_.size(); ++t)
  {
    const double c = coefficient(t, mu);
    if (c != 0.0)
      value += c * monomial_derivative(p, terms_[t].derivative, x);
  }
  return value;
}

std::vector<double> ParametricOperator::affine_coefficients(const ParamVec &mu) const
{
  std::vector<double> theta(static_cast<std::size_t>(affine_size()));
  theta[0] = 1.0;
  for (Index j = 0; j < param_dim_; ++j)
    theta[static_cast<std::size_t>(j + 1)] = mu(j);
  return theta;
}

ParametricOperator ParametricOperator::affine_component(Index k) const
{
  std::vector<OperatorTerm> terms;
  for (const auto &t : terms_)
  {
    const double c = k == 0 ? t.constant : t.linear(k - 1);
    if (c != 0.0)
      terms.push_back({t.derivative, c, Eigen::VectorXd::Zero(param_dim_)});
  }
  return ParametricOperator(param_dim_, std::move(terms), forcing_, boundary_,
                            name_ + "[" + std::to_string(k) + "]", false);
}

double ParametricOperator::finite_difference_check(const RbfKernel &kernel, int probes,
                                                   double h, unsigned seed) const
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> offset(-0.3, 0.3);
  std::uniform_real_distribution<double> param(0.0, 2.0);
  double worst = 0.0;
  for (int k = 0; k < probes; ++k)
  {
    const Vec2 c(coord(rng), coord(rng));
    const Vec2 x = c + Vec2(offset(rng), offset(rng));
    ParamVec mu(param_dim_);
    for (Index j = 0; j < param_dim_; ++j)
      mu(j) = param(rng);

    double fd = 0.0, scale = 0.0;
    for (std::size_t t = 0; t < terms_.size(); ++t)
    {
      const double coef = coefficient(t, mu);
      fd += coef * finite_difference(kernel, terms_[t].derivative, c, x, h);
      // Natural size of a k-th derivative of the kernel is shape^k * phi; it keeps
      // the scale away from zero where the derivative itself changes sign.
      const auto [ox, oy] = derivative_orders(terms_[t].derivative);
      const double natural = std::pow(kernel.shape, ox + oy) * kernel_value(kernel, c, x);
      scale += std::abs(coef) *
               (std::abs(kernel_derivative(kernel, terms_[t].derivative, c, x)) + natural);
    }
    const double exact = apply_to_kernel(kernel, c, x, mu);
    if (scale > 0.0)
      worst = std::max(worst, std::abs(exact - fd) / scale);
  }
  return worst;
}

Eigen::MatrixXd local_interp_matrix(const Eigen::Matrix2Xd &points, const RbfKernel &kernel,
                                    const PolyAugmentation &aug)
{
  const Index n = points.cols();
  const Index q = aug.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + q, n + q);
  for (Index j = 0; j < n; ++j)
  {
    m(j, j) = imq_eval(kernel.shape, 0.0);
    for (Index k = j + 1; k < n; ++k)
    {
      const double v = imq_eval(kernel.shape, (points.col(j) - points.col(k)).norm());
      m(j, k) = v;
      m(k, j) = v;
    }
    for (Index k = 0; k < q; ++k)
    {
      const double p =
        monomial_derivative(aug.terms[static_cast<std::size_t>(k)], Derivative::Value,
                            points.col(j));
      m(j, n + k) = p;
      m(n + k, j) = p;
    }
  }
  return m;
}

Eigen::MatrixXd stencil_weights(const Eigen::Matrix2Xd &points, const RbfKernel &kernel,
                                const PolyAugmentation &aug,
                                const std::vector<const ParametricOperator *> &operators,
                                const ParamVec &mu, Index center)
{
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(local_interp_matrix(points, kernel, aug));
  check_pivots(qr, center);
  const Eigen::MatrixXd sol = qr.solve(local_rhs(points, kernel, aug, operators, mu, center));
  return sol.topRows(points.cols());
}

Eigen::VectorXd stencil_weights(const Eigen::Matrix2Xd &points, const RbfKernel &kernel,
                                const PolyAugmentation &aug, const ParametricOperator &op,
                                const ParamVec &mu, Index center)
{
  return stencil_weights(points, kernel, aug, {&op}, mu, center).col(0);
}

SparseRowMatrix HighFidelitySystem::full_matrix() const
{
  const Index n = size();
  const Index ni = n_interior();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(operator_rows.nonZeros() + n - ni));
  for (Index i = 0; i < ni; ++i)
    for (SparseRowMatrix::InnerIterator it(operator_rows, i); it; ++it)
      triplets.emplace_back(i, it.col(), it.value());
  for (Index b = ni; b < n; ++b)
    triplets.emplace_back(b, b, 1.0);
  return from_triplets(n, n, triplets);
}

Eigen::MatrixXd HighFidelitySystem::apply(const Eigen::MatrixXd &x) const
{
  if (x.rows() != size())
    throw DimensionError("HighFidelitySystem::apply: dimension mismatch");
  Eigen::MatrixXd y(size(), x.cols());
  y.topRows(n_interior()) = operator_rows * x;
  y.bottomRows(size() - n_interior()) = x.bottomRows(size() - n_interior());
  return y;
}

Eigen::VectorXd assemble_rhs(const geometry::NodeSet &nodes, const ParametricOperator &op,
                             const ParamVec &mu)
{
  Eigen::VectorXd rhs(nodes.size());
  for (Index i = 0; i < nodes.size(); ++i)
    rhs(i) = nodes.is_interior(i) ? op.forcing(nodes.point(i), mu)
                                  : op.boundary(nodes.point(i), mu);
  return rhs;
}

namespace
{

Eigen::Matrix2Xd gather(const geometry::NodeSet &nodes, const std::vector<Index> &stencil)
{
  Eigen::Matrix2Xd pts(2, static_cast<Index>(stencil.size()));
  for (std::size_t j = 0; j < stencil.size(); ++j)
    pts.col(static_cast<Index>(j)) = nodes.point(stencil[j]);
  return pts;
}

void check_stencils(const geometry::NodeSet &nodes, const geometry::StencilSet &stencils)
{
  if (static_cast<Index>(stencils.stencils.size()) != nodes.n_interior())
    throw DimensionError("stencil count does not match the number of interior nodes");
}

} // namespace

HighFidelitySystem assemble_system(const geometry::NodeSet &nodes,
                                   const geometry::StencilSet &stencils,
                                   const RbfKernel &kernel, const PolyAugmentation &aug,
                                   const ParametricOperator &op, const ParamVec &mu)
{
  check_stencils(nodes, stencils);
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(nodes.n_interior() * stencils.n_loc));
  for (Index i = 0; i < nodes.n_interior(); ++i)
  {
    const auto &stencil = stencils.stencils[static_cast<std::size_t>(i)];
    Eigen::VectorXd w;
    try
    {
      w = stencil_weights(gather(nodes, stencil), kernel, aug, op, mu, 0);
    }
    catch (const SingularSystemError &e)
    {
      throw SingularSystemError(std::string(e.what()) + " at interior node " + std::to_string(i), i);
    }
    for (std::size_t j = 0; j < stencil.size(); ++j)
      triplets.emplace_back(i, stencil[j], w(static_cast<Index>(j)));
  }
  HighFidelitySystem system;
  system.operator_rows = from_triplets(nodes.n_interior(), nodes.size(), triplets);
  system.rhs = assemble_rhs(nodes, op, mu);
  return system;
}

AffineOperatorRows::AffineOperatorRows(const geometry::NodeSet &nodes,
                                       const geometry::StencilSet &stencils,
                                       const RbfKernel &kernel, const PolyAugmentation &aug,
                                       const ParametricOperator &op)
{
  check_stencils(nodes, stencils);
  std::vector<ParametricOperator> parts;
  for (Index k = 0; k < op.affine_size(); ++k)
    parts.push_back(op.affine_component(k));
  std::vector<const ParametricOperator *> ptrs;
  for (const auto &p : parts)
    ptrs.push_back(&p);

  const ParamVec mu0 = ParamVec::Zero(op.param_dim());
  std::vector<std::vector<Triplet>> triplets(parts.size());
  for (Index i = 0; i < nodes.n_interior(); ++i)
  {
    const auto &stencil = stencils.stencils[static_cast<std::size_t>(i)];
    Eigen::MatrixXd w;
    try
    {
      w = stencil_weights(gather(nodes, stencil), kernel, aug, ptrs, mu0, 0);
    }
    catch (const SingularSystemError &e)
    {
      throw SingularSystemError(std::string(e.what()) + " at interior node " + std::to_string(i), i);
    }
    for (std::size_t k = 0; k < parts.size(); ++k)
      for (std::size_t j = 0; j < stencil.size(); ++j)
        triplets[k].emplace_back(i, stencil[j], w(static_cast<Index>(j), static_cast<Index>(k)));
  }
  for (const auto &t : triplets)
    components_.push_back(from_triplets(nodes.n_interior(), nodes.size(), t));
}

SparseRowMatrix AffineOperatorRows::rows(const ParamVec &mu) const
{
  SparseRowMatrix l = components_[0];
  for (std::size_t k = 1; k < components_.size(); ++k)
    l += mu(static_cast<Index>(k - 1)) * components_[k];
  return l;
}

namespace
{

// Hager's estimate of ||A^{-1}||_1 from an existing factorization.
template <typename Solver>
double inverse_norm1_estimate(Solver &lu, Index n)
{
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double estimate = 0.0;
  for (int iter = 0; iter < 5; ++iter)
  {
    const Eigen::VectorXd y = lu.solve(x);
    estimate = y.lpNorm<1>();
    const Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Eigen::VectorXd z = lu.transpose().solve(xi);
    Index j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= z.dot(x))
      break;
    x.setZero();
    x(j) = 1.0;
  }
  return estimate;
}

} // namespace

Eigen::VectorXd solve_high_fidelity(const HighFidelitySystem &system, const SolveOptions &options,
                                    SolveDiagnostics *diagnostics)
{
  const Index n = system.size();
  const Index ni = system.n_interior();
  if (system.rhs.size() != n)
    throw DimensionError("solve_high_fidelity: rhs length does not match N");

  Eigen::VectorXd u(n);
  u.tail(n - ni) = system.rhs.tail(n - ni);
  if (ni == 0)
    return u;

  const Eigen::SparseMatrix<double> interior = system.operator_rows.leftCols(ni);
  const Eigen::SparseMatrix<double> coupling = system.operator_rows.rightCols(n - ni);
  const Eigen::VectorXd b = system.rhs.head(ni) - coupling * system.rhs.tail(n - ni);

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(interior);
  lu.factorize(interior);
  if (lu.info() != Eigen::Success)
    throw SingularSystemError("solve_high_fidelity: sparse LU failed (" + lu.lastErrorMessage() + ")");
  u.head(ni) = lu.solve(b);
  if (!u.head(ni).allFinite())
    throw SingularSystemError("solve_high_fidelity: non-finite solution");

  if (options.estimate_condition || diagnostics != nullptr)
  {
    double norm1 = 0.0;
    const Eigen::VectorXd colsum = Eigen::RowVectorXd::Ones(ni) * interior.cwiseAbs();
    norm1 = colsum.maxCoeff();
    const double cond = norm1 * inverse_norm1_estimate(lu, ni);
    if (diagnostics != nullptr)
    {
      diagnostics->condition_estimate = cond;
      diagnostics->ill_conditioned = cond > options.condition_warning;
    }
  }
  return u;
}

void export_triplets(const HighFidelitySystem &system, std::ostream &out)
{
  out << "row,col,value\n";
  out.precision(17);
  const SparseRowMatrix full = system.full_matrix();
  for (Index i = 0; i < full.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(full, i); it; ++it)
      out << it.row() << ',' << it.col() << ',' << it.value() << '\n';
}

} // namespace podnn::rbf
