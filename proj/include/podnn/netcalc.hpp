// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PODNN_NETCALC_HPP
#define PODNN_NETCALC_HPP

#include <utility>
#include <vector>

#include "podnn/rom.hpp"
#include "podnn/types.hpp"

namespace podnn::netcalc
{

// One affine map x -> W x + b. ReLU is applied between layers, never after the
// last one.
struct Layer
{
  SparseRowMatrix W;
  Eigen::VectorXd b;

  Index nonzeros() const;
};

// ((W_1, b_1), ..., (W_L, b_L)). Weights are sparse; explicit zeros are pruned
// on construction so nonzeros() is the count of entries != 0.0.
class ReluNetwork
{
public:
  ReluNetwork() = default;
  explicit ReluNetwork(std::vector<Layer> layers);

  static ReluNetwork affine(SparseRowMatrix W, Eigen::VectorXd b);
  static ReluNetwork affine(const Eigen::MatrixXd &W, const Eigen::VectorXd &b);
  static ReluNetwork from_dense(const std::vector<Eigen::MatrixXd> &weights,
                                const std::vector<Eigen::VectorXd> &biases);

  const std::vector<Layer> &layers() const { return layers_; }
  const Layer &layer(Index i) const { return layers_[static_cast<std::size_t>(i)]; }

  Index depth() const { return static_cast<Index>(layers_.size()); }
  Index input_dim() const { return layers_.front().W.cols(); }
  Index output_dim() const { return layers_.back().W.rows(); }
  Index nonzeros() const;

  // Dense copies, e.g. for persistence in the matrix container.
  std::vector<Eigen::MatrixXd> dense_weights() const;
  std::vector<Eigen::VectorXd> biases() const;

private:
  std::vector<Layer> layers_;
};

// x_0 = x, x_i = relu(W_i x_{i-1} + b_i) for i < L, x_L = W_L x_{L-1} + b_L.
Eigen::VectorXd realize(const ReluNetwork &net, const Eigen::VectorXd &x);
// Column-wise realization of an n_0 x m batch.
Eigen::MatrixXd realize_batch(const ReluNetwork &net, const Eigen::MatrixXd &X);

// Column-major flattening and its inverse.
Eigen::VectorXd vec(const Eigen::MatrixXd &A);
Eigen::MatrixXd matr(const Eigen::VectorXd &v, Index rows, Index cols);

struct SizeReport
{
  Index L = 0;
  Index M = 0;
  std::vector<Index> layer_nonzeros;
  std::vector<Index> widths;    // n_0, n_1, ..., n_L
};

SizeReport size_report(const ReluNetwork &net);

// phi1 o phi2: the last layer of phi2 and the first of phi1 are fused, so the
// depth is L1 + L2 - 1.
ReluNetwork concat(const ReluNetwork &phi1, const ReluNetwork &phi2);

// j = 1: ((I, 0)). j >= 2: ([I; -I], 0), (I_2n, 0) x (j - 2), ([I, -I], 0).
ReluNetwork identity_net(Index n, Index j);

// phi1 o Id_{n,2} o phi2, depth L1 + L2.
ReluNetwork sparse_concat(const ReluNetwork &phi1, const ReluNetwork &phi2);

// Pads phi with identity layers on its output up to target_depth.
ReluNetwork extend_to_depth(const ReluNetwork &phi, Index target_depth);

// Block-diagonal stacking on concatenated inputs; shallower networks are first
// extended to the deepest one. Input dimensions may differ.
ReluNetwork parallelize(const std::vector<ReluNetwork> &nets);

// ((I; I; ...; I), 0) with `copies` blocks of size n.
ReluNetwork duplicate_input(Index n, Index copies);

// Last layer replaced by (s W_L, s b_L + shift).
ReluNetwork scale_output(const ReluNetwork &net, double s, const Eigen::VectorXd &shift);

// Number of sawtooth stages q of the scalar squaring network so that each
// scalar product of entries bounded by Z is within tau = eps / (n sqrt(mk)).
Index mult_stages(double Z, Index m, Index n, Index k, double eps);

// Input (vec A, vec B) with A m x n, B n x k; output vec of the approximate A B.
// Products use xy = Z^2 (f(|x + y| / 2Z) - f(|x - y| / 2Z)) with f the
// q-stage sawtooth approximation of t^2 on [0, 1].
ReluNetwork mult_net(double Z, Index m, Index n, Index k, double eps);

struct PowerSchedule
{
  std::vector<double> tolerances;   // tau_j, j = 1..i
  std::vector<double> bounds;       // Z_j, the norm bound on the stage input
  std::vector<double> errors;       // propagated error bound after stage j
};

// Per-stage budgets tau_j = eps 3^{-(i-j)} / 2, halved until the propagated
// bound E_j = (2 a_{j-1} + E_{j-1}) E_{j-1} + tau_j with a_j = (1 - delta)^{2^j}
// satisfies E_i <= eps.
PowerSchedule power_schedule(Index i, double eps, double delta);

// Input vec A (n x n, ||A||_2 <= 1 - delta), output vec of the approximate A^{2^i}.
ReluNetwork power_net(Index i, double eps, double delta, Index n);

struct InverseNetConfig
{
  double epsilon = 0.1;
  double delta = 0.5;

  // l = ceil(log2(log_{1-delta}(delta eps / 2) + 1))
  Index stages() const;
  double mult_tolerance(Index i) const;
  double power_tolerance(Index i) const;
  double z1() const { return 1.0 - delta; }
  double z2() const { return 3.0 + epsilon + 1.0 / delta; }
  void validate() const;
};

// Input vec A (||A||_2 <= 1 - delta), output vec of the approximate (I - A)^{-1}
// as the product prod_{i<l} (A^{2^i} + I).
ReluNetwork inverse_net(const InverseNetConfig &cfg, Index n);

// (sum_{i < 2^l} A^i, prod_{i < l} (A^{2^i} + I))
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> neumann_product_check(const Eigen::MatrixXd &A,
                                                                  Index l);

struct BtbSchedule
{
  double eps1 = 0.0;   // accuracy required of the B and B^T networks
  double eps2 = 0.0;   // B^T B multiplication
  double z = 0.0;      // alpha + eps1
  InverseNetConfig inverse;
};

struct ParametricSchedule
{
  double eps1 = 0.0;   // B^T network
  double eps2 = 0.0;   // fg network
  double eps3 = 0.0;   // B^T fg multiplication
  double eps4 = 0.0;   // (B^T B)^{-1} network
  double eps4_1 = 0.0; // accuracy the B networks need inside the inverse branch
  double eps5 = 0.0;   // final multiplication
  double z1 = 0.0;
  double z2 = 0.0;
};

// Spectrum of B^T B in [beta^2, alpha^2] and ||(f, g)|| <= gamma over the
// parameter domain.
struct ParametricNetConfig
{
  double alpha = 1.0;
  double beta = 0.5;
  double gamma = 1.0;

  double lambda() const { return 1.0 / (alpha * alpha + beta * beta); }
  double delta() const { return lambda() * beta * beta; }
  void validate() const;

  BtbSchedule btb_schedule(double eps) const;
  ParametricSchedule parametric_schedule(double eps) const;
};

// mu -> vec((B^T B)^{-1}) for networks phi_b: mu -> vec(B), phi_bt: mu -> vec(B^T),
// B of size N x n_pod, each accurate to btb_schedule(eps).eps1.
ReluNetwork btb_inverse_net(const ReluNetwork &phi_b, const ReluNetwork &phi_bt, Index n_pod,
                            const ParametricNetConfig &cfg, double eps);

struct ParametricMapNets
{
  ReluNetwork network;       // mu -> c(mu)
  ReluNetwork btb_inverse;   // mu -> vec((B^T B)^{-1})
  ReluNetwork bt_fg;         // mu -> B^T (f, g)
  ParametricSchedule schedule;
};

// The B networks are shared by both branches and must meet min(eps1, eps4_1).
ParametricMapNets parametric_map_net(const ReluNetwork &phi_b, const ReluNetwork &phi_bt,
                                     const ReluNetwork &phi_fg, Index n_pod,
                                     const ParametricNetConfig &cfg, double eps);

struct AffineBNetworks
{
  ReluNetwork b;    // mu -> vec(B_mu)
  ReluNetwork bt;   // mu -> vec(B_mu^T)
};

// Exact one-layer networks for an affine reduced operator.
AffineBNetworks affine_b_network(const rom::AffineReducedOperator &op);

// mu -> value for every mu in R^p.
ReluNetwork constant_network(Index p, const Eigen::VectorXd &value);

} // namespace podnn::netcalc

#endif // PODNN_NETCALC_HPP
