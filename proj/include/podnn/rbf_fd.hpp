// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PODNN_RBF_FD_HPP
#define PODNN_RBF_FD_HPP

#include <cmath>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "podnn/geometry.hpp"
#include "podnn/types.hpp"

namespace podnn::rbf
{

enum class KernelKind
{
  IMQ
};

// Positive definite kernels have cpd_order 0 and need no polynomial augmentation.
struct RbfKernel
{
  KernelKind kind = KernelKind::IMQ;
  double shape = 3.0;
  int cpd_order = 0;
};

// 1 / sqrt(1 + (eps r)^2)
template <typename Scalar>
Scalar imq_eval(Scalar eps, Scalar r)
{
  using std::sqrt;
  return Scalar(1) / sqrt(Scalar(1) + (eps * r) * (eps * r));
}

struct Monomial
{
  int px = 0;
  int py = 0;
};

// Polynomial space appended to the local interpolation system. An empty term
// list means no augmentation (Q = 0).
struct PolyAugmentation
{
  std::vector<Monomial> terms;

  static PolyAugmentation none() { return {}; }
  // All bivariate monomials of total degree <= degree; Q = (degree+1)(degree+2)/2.
  static PolyAugmentation total_degree(int degree);
  // Monomials x^0..x^degree only, for one-dimensional stencils laid along y = 0.
  static PolyAugmentation univariate(int degree);

  Index size() const { return static_cast<Index>(terms.size()); }
  bool active() const { return !terms.empty(); }
};

enum class Derivative
{
  Value,
  Dx,
  Dy,
  Dxx,
  Dyy,
  Dxy
};

// Coefficient of one operator term, affine in mu: constant + linear . mu.
struct OperatorTerm
{
  Derivative derivative = Derivative::Value;
  double constant = 0.0;
  Eigen::VectorXd linear;
};

// Linear second-order operator L(mu) = sum_t c_t(mu) D_t with spatially
// constant coefficients, plus Dirichlet data. Kernel and polynomial
// applications are closed form; construction runs a central-difference
// self-check of the kernel derivatives at random probes.
class ParametricOperator
{
public:
  using Field = std::function<double(const Vec2 &, const ParamVec &)>;

  ParametricOperator(Index param_dim, std::vector<OperatorTerm> terms, Field forcing,
                     Field boundary, std::string name = "operator", bool self_check = true);

  Index param_dim() const { return param_dim_; }
  const std::vector<OperatorTerm> &terms() const { return terms_; }
  const std::string &name() const { return name_; }

  double coefficient(std::size_t term, const ParamVec &mu) const;

  // (L(mu) phi_{eps, center})(x)
  double apply_to_kernel(const RbfKernel &kernel, const Vec2 &center, const Vec2 &x,
                         const ParamVec &mu) const;
  // (L(mu) p)(x) for the monomial p
  double apply_to_poly(const Monomial &p, const Vec2 &x, const ParamVec &mu) const;

  double forcing(const Vec2 &x, const ParamVec &mu) const { return forcing_(x, mu); }
  double boundary(const Vec2 &x, const ParamVec &mu) const { return boundary_(x, mu); }

  // Affine decomposition L(mu) = L_0 + sum_j mu_j L_j. Component 0 carries the
  // constants, component j the coefficients of mu_j; all have empty linear parts.
  Index affine_size() const { return param_dim_ + 1; }
  std::vector<double> affine_coefficients(const ParamVec &mu) const;
  ParametricOperator affine_component(Index k) const;

  // Largest relative mismatch of apply_to_kernel against central differences
  // with step h on `probes` random (center, x, mu) triples drawn with `seed`.
  double finite_difference_check(const RbfKernel &kernel, int probes, double h,
                                 unsigned seed) const;

private:
  Index param_dim_;
  std::vector<OperatorTerm> terms_;
  Field forcing_;
  Field boundary_;
  std::string name_;
};

// Partial derivative of the kernel centred at `center`, evaluated at x.
double kernel_derivative(const RbfKernel &kernel, Derivative d, const Vec2 &center,
                         const Vec2 &x);
double monomial_derivative(const Monomial &p, Derivative d, const Vec2 &x);

// (-d_xx - mu_1 d_yy - mu_2) phi_{eps, center} at x, closed form.
double helmholtz_apply_imq(const ParamVec &mu, const Vec2 &center, const Vec2 &x, double eps);

// [[A, P], [P^T, 0]] with A_jk = phi(eps |x_j - x_k|), P_jk = p_k(x_j).
Eigen::MatrixXd local_interp_matrix(const Eigen::Matrix2Xd &points, const RbfKernel &kernel,
                                    const PolyAugmentation &aug);

// Stencil weights for each right-hand side column of `operators` evaluated at
// the stencil point `center`; one factorization serves all operators.
Eigen::MatrixXd stencil_weights(const Eigen::Matrix2Xd &points, const RbfKernel &kernel,
                                const PolyAugmentation &aug,
                                const std::vector<const ParametricOperator *> &operators,
                                const ParamVec &mu, Index center);

Eigen::VectorXd stencil_weights(const Eigen::Matrix2Xd &points, const RbfKernel &kernel,
                                const PolyAugmentation &aug, const ParametricOperator &op,
                                const ParamVec &mu, Index center = 0);

// Compact global system: interior rows L (N_I x N) and an implicit identity on
// boundary rows; rhs = (f on interior, g on boundary).
struct HighFidelitySystem
{
  SparseRowMatrix operator_rows;
  Eigen::VectorXd rhs;

  Index size() const { return operator_rows.cols(); }
  Index n_interior() const { return operator_rows.rows(); }

  // Full N x N matrix including the identity boundary block.
  SparseRowMatrix full_matrix() const;
  // Apply the compact matrix to a block of N-vectors.
  Eigen::MatrixXd apply(const Eigen::MatrixXd &x) const;
};

struct RbfFdSettings
{
  RbfKernel kernel;
  PolyAugmentation augmentation;
  Index n_loc = 13;
};

HighFidelitySystem assemble_system(const geometry::NodeSet &nodes,
                                   const geometry::StencilSet &stencils,
                                   const RbfKernel &kernel, const PolyAugmentation &aug,
                                   const ParametricOperator &op, const ParamVec &mu);

// rhs (f(x_i; mu) on interior, g(x_j; mu) on boundary)
Eigen::VectorXd assemble_rhs(const geometry::NodeSet &nodes, const ParametricOperator &op,
                             const ParamVec &mu);

// Interior operator rows for every affine component, computed once so that
// L(mu) = L_0 + sum_j mu_j L_j can be formed without new stencil solves.
class AffineOperatorRows
{
public:
  AffineOperatorRows(const geometry::NodeSet &nodes, const geometry::StencilSet &stencils,
                     const RbfKernel &kernel, const PolyAugmentation &aug,
                     const ParametricOperator &op);

  SparseRowMatrix rows(const ParamVec &mu) const;
  const std::vector<SparseRowMatrix> &components() const { return components_; }

private:
  std::vector<SparseRowMatrix> components_;
};

struct SolveDiagnostics
{
  double condition_estimate = 0.0; // 1-norm estimate of the interior block
  bool ill_conditioned = false;
};

struct SolveOptions
{
  bool estimate_condition = false;
  double condition_warning = 1e12;
};

// Solves the compact system by eliminating the boundary unknowns, so the
// boundary entries of the result equal g bitwise.
Eigen::VectorXd solve_high_fidelity(const HighFidelitySystem &system,
                                    const SolveOptions &options = {},
                                    SolveDiagnostics *diagnostics = nullptr);

// row,col,value lines with a header; boundary identity rows included.
void export_triplets(const HighFidelitySystem &system, std::ostream &out);

} // namespace podnn::rbf

#endif // PODNN_RBF_FD_HPP
