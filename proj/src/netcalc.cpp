// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "podnn/netcalc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace podnn::netcalc
{

namespace
{

void prune_zeros(SparseRowMatrix &W)
{
  W.prune([](Index, Index, double v) { return v != 0.0; });
  W.makeCompressed();
}

SparseRowMatrix sparse_identity(Index n)
{
  SparseRowMatrix I(n, n);
  I.setIdentity();
  return I;
}

SparseRowMatrix from_triplets(Index rows, Index cols, const std::vector<Triplet> &triplets)
{
  SparseRowMatrix W(rows, cols);
  W.setFromTriplets(triplets.begin(), triplets.end());
  return W;
}

std::string shape(Index r, Index c)
{
  return std::to_string(r) + "x" + std::to_string(c);
}

} // namespace

Index Layer::nonzeros() const
{
  return W.nonZeros() + static_cast<Index>((b.array() != 0.0).count());
}

ReluNetwork::ReluNetwork(std::vector<Layer> layers) : layers_(std::move(layers))
{
  if (layers_.empty())
    throw DimensionError("ReluNetwork: at least one layer is required");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Layer &layer = layers_[i];
    if (layer.b.size() != layer.W.rows())
      throw DimensionError("ReluNetwork: layer " + std::to_string(i + 1) + " has W " +
                           shape(layer.W.rows(), layer.W.cols()) + " but b of length " +
                           std::to_string(layer.b.size()));
    if (i > 0 && layer.W.cols() != layers_[i - 1].W.rows())
      throw DimensionError("ReluNetwork: layer " + std::to_string(i + 1) + " expects " +
                           std::to_string(layer.W.cols()) + " inputs, previous layer gives " +
                           std::to_string(layers_[i - 1].W.rows()));
    prune_zeros(layer.W);
  }
}

ReluNetwork ReluNetwork::affine(SparseRowMatrix W, Eigen::VectorXd b)
{
  return ReluNetwork({Layer{std::move(W), std::move(b)}});
}

ReluNetwork ReluNetwork::affine(const Eigen::MatrixXd &W, const Eigen::VectorXd &b)
{
  return affine(SparseRowMatrix(W.sparseView(1.0, 0.0)), b);
}

ReluNetwork ReluNetwork::from_dense(const std::vector<Eigen::MatrixXd> &weights,
                                    const std::vector<Eigen::VectorXd> &biases)
{
  if (weights.size() != biases.size())
    throw DimensionError("ReluNetwork::from_dense: " + std::to_string(weights.size()) +
                         " weights vs " + std::to_string(biases.size()) + " biases");
  std::vector<Layer> layers;
  layers.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i)
    layers.push_back({SparseRowMatrix(weights[i].sparseView(1.0, 0.0)), biases[i]});
  return ReluNetwork(std::move(layers));
}

Index ReluNetwork::nonzeros() const
{
  Index M = 0;
  for (const Layer &layer : layers_)
    M += layer.nonzeros();
  return M;
}

std::vector<Eigen::MatrixXd> ReluNetwork::dense_weights() const
{
  std::vector<Eigen::MatrixXd> out;
  out.reserve(layers_.size());
  for (const Layer &layer : layers_)
    out.emplace_back(layer.W.toDense());
  return out;
}

std::vector<Eigen::VectorXd> ReluNetwork::biases() const
{
  std::vector<Eigen::VectorXd> out;
  out.reserve(layers_.size());
  for (const Layer &layer : layers_)
    out.push_back(layer.b);
  return out;
}

Eigen::MatrixXd realize_batch(const ReluNetwork &net, const Eigen::MatrixXd &X)
{
  if (X.rows() != net.input_dim())
    throw DimensionError("realize: network takes " + std::to_string(net.input_dim()) +
                         " inputs, got " + std::to_string(X.rows()));
  Eigen::MatrixXd x = X;
  const Index L = net.depth();
  for (Index i = 0; i < L; ++i) {
    const Layer &layer = net.layer(i);
    Eigen::MatrixXd z = layer.W * x;
    z.colwise() += layer.b;
    if (i + 1 < L)
      z = z.cwiseMax(0.0);
    x = std::move(z);
  }
  return x;
}

Eigen::VectorXd realize(const ReluNetwork &net, const Eigen::VectorXd &x)
{
  return realize_batch(net, x);
}

Eigen::VectorXd vec(const Eigen::MatrixXd &A)
{
  return Eigen::Map<const Eigen::VectorXd>(A.data(), A.size());
}

Eigen::MatrixXd matr(const Eigen::VectorXd &v, Index rows, Index cols)
{
  if (rows * cols != v.size())
    throw DimensionError("matr: vector of length " + std::to_string(v.size()) +
                         " cannot be shaped " + shape(rows, cols));
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

SizeReport size_report(const ReluNetwork &net)
{
  SizeReport r;
  r.L = net.depth();
  r.widths.push_back(net.input_dim());
  for (const Layer &layer : net.layers()) {
    r.layer_nonzeros.push_back(layer.nonzeros());
    r.widths.push_back(layer.W.rows());
    r.M += layer.nonzeros();
  }
  return r;
}

ReluNetwork concat(const ReluNetwork &phi1, const ReluNetwork &phi2)
{
  if (phi1.input_dim() != phi2.output_dim())
    throw DimensionError("concat: outer network takes " + std::to_string(phi1.input_dim()) +
                         " inputs, inner network gives " + std::to_string(phi2.output_dim()));
  std::vector<Layer> layers(phi2.layers().begin(), phi2.layers().end() - 1);
  const Layer &inner = phi2.layers().back();
  const Layer &outer = phi1.layers().front();
  Eigen::VectorXd b = outer.W * inner.b;
  b += outer.b;
  layers.push_back({SparseRowMatrix(outer.W * inner.W), std::move(b)});
  layers.insert(layers.end(), phi1.layers().begin() + 1, phi1.layers().end());
  return ReluNetwork(std::move(layers));
}

ReluNetwork identity_net(Index n, Index j)
{
  if (n < 1 || j < 1)
    throw DimensionError("identity_net: need n >= 1 and j >= 1, got n=" + std::to_string(n) +
                         ", j=" + std::to_string(j));
  if (j == 1)
    return ReluNetwork::affine(sparse_identity(n), Eigen::VectorXd::Zero(n));

  std::vector<Triplet> split, merge;
  for (Index r = 0; r < n; ++r) {
    split.emplace_back(r, r, 1.0);
    split.emplace_back(n + r, r, -1.0);
    merge.emplace_back(r, r, 1.0);
    merge.emplace_back(r, n + r, -1.0);
  }
  std::vector<Layer> layers;
  layers.push_back({from_triplets(2 * n, n, split), Eigen::VectorXd::Zero(2 * n)});
  for (Index i = 0; i < j - 2; ++i)
    layers.push_back({sparse_identity(2 * n), Eigen::VectorXd::Zero(2 * n)});
  layers.push_back({from_triplets(n, 2 * n, merge), Eigen::VectorXd::Zero(n)});
  return ReluNetwork(std::move(layers));
}

ReluNetwork sparse_concat(const ReluNetwork &phi1, const ReluNetwork &phi2)
{
  if (phi1.input_dim() != phi2.output_dim())
    throw DimensionError("sparse_concat: outer network takes " +
                         std::to_string(phi1.input_dim()) + " inputs, inner network gives " +
                         std::to_string(phi2.output_dim()));
  return concat(phi1, concat(identity_net(phi2.output_dim(), 2), phi2));
}

ReluNetwork extend_to_depth(const ReluNetwork &phi, Index target_depth)
{
  if (target_depth < phi.depth())
    throw DimensionError("extend_to_depth: target depth " + std::to_string(target_depth) +
                         " is below the network depth " + std::to_string(phi.depth()));
  if (target_depth == phi.depth())
    return phi;
  return sparse_concat(identity_net(phi.output_dim(), target_depth - phi.depth()), phi);
}

ReluNetwork parallelize(const std::vector<ReluNetwork> &nets)
{
  if (nets.empty())
    throw DimensionError("parallelize: no networks given");
  if (nets.size() == 1)
    return nets.front();

  Index L = 0;
  for (const ReluNetwork &net : nets)
    L = std::max(L, net.depth());
  std::vector<ReluNetwork> extended;
  extended.reserve(nets.size());
  for (const ReluNetwork &net : nets)
    extended.push_back(extend_to_depth(net, L));

  std::vector<Layer> layers;
  for (Index i = 0; i < L; ++i) {
    Index rows = 0, cols = 0;
    for (const ReluNetwork &net : extended) {
      rows += net.layer(i).W.rows();
      cols += net.layer(i).W.cols();
    }
    std::vector<Triplet> triplets;
    Eigen::VectorXd b(rows);
    Index r0 = 0, c0 = 0;
    for (const ReluNetwork &net : extended) {
      const Layer &layer = net.layer(i);
      for (Index r = 0; r < layer.W.outerSize(); ++r)
        for (SparseRowMatrix::InnerIterator it(layer.W, r); it; ++it)
          triplets.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
      b.segment(r0, layer.b.size()) = layer.b;
      r0 += layer.W.rows();
      c0 += layer.W.cols();
    }
    layers.push_back({from_triplets(rows, cols, triplets), std::move(b)});
  }
  return ReluNetwork(std::move(layers));
}

ReluNetwork duplicate_input(Index n, Index copies)
{
  if (n < 1 || copies < 1)
    throw DimensionError("duplicate_input: need n >= 1 and copies >= 1");
  std::vector<Triplet> triplets;
  for (Index c = 0; c < copies; ++c)
    for (Index r = 0; r < n; ++r)
      triplets.emplace_back(c * n + r, r, 1.0);
  return ReluNetwork::affine(from_triplets(n * copies, n, triplets),
                             Eigen::VectorXd::Zero(n * copies));
}

ReluNetwork scale_output(const ReluNetwork &net, double s, const Eigen::VectorXd &shift)
{
  if (shift.size() != net.output_dim())
    throw DimensionError("scale_output: shift of length " + std::to_string(shift.size()) +
                         " for output dimension " + std::to_string(net.output_dim()));
  std::vector<Layer> layers = net.layers();
  Layer &last = layers.back();
  last.W *= s;
  last.b = s * last.b + shift;
  return ReluNetwork(std::move(layers));
}

Index mult_stages(double Z, Index m, Index n, Index k, double eps)
{
  if (!(Z > 0.0) || !(eps > 0.0 && eps < 1.0) || m < 1 || n < 1 || k < 1)
    throw ConfigError("mult_net: need Z > 0, eps in (0, 1) and positive dimensions");
  const double tau = eps / (static_cast<double>(n) * std::sqrt(static_cast<double>(m * k)));
  Index q = 0;
  while (Z * Z * std::ldexp(1.0, static_cast<int>(-2 * q - 1)) > tau)
    ++q;
  return q;
}

ReluNetwork mult_net(double Z, Index m, Index n, Index k, double eps)
{
  const Index q = mult_stages(Z, m, n, k, eps);
  const Index P = m * n * k;
  const Index in_dim = n * (m + k);
  const double w_t = 1.0 / (2.0 * Z);

  // Product p = (c m + r) n + s multiplies A(r, s) by B(s, c). Chain 0 carries
  // u = x + y, chain 1 carries v = x - y. In hat layers the eight neurons of a
  // product are ordered (h_j of chain 0, h_j of chain 1) for j = 0..3, so the
  // two chains cancel pairwise in the output sum.
  auto hat = [](Index p, Index chain, Index j) { return 8 * p + 2 * j + chain; };

  std::vector<Layer> layers;
  {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(8 * P));
    for (Index c = 0; c < k; ++c)
      for (Index r = 0; r < m; ++r)
        for (Index s = 0; s < n; ++s) {
          const Index p = (c * m + r) * n + s;
          const Index xi = r + s * m;
          const Index yi = m * n + s + c * n;
          for (Index chain = 0; chain < 2; ++chain) {
            const double sy = chain == 0 ? 1.0 : -1.0;
            t.emplace_back(4 * p + 2 * chain, xi, 1.0);
            t.emplace_back(4 * p + 2 * chain, yi, sy);
            t.emplace_back(4 * p + 2 * chain + 1, xi, -1.0);
            t.emplace_back(4 * p + 2 * chain + 1, yi, -sy);
          }
        }
    layers.push_back({from_triplets(4 * P, in_dim, t), Eigen::VectorXd::Zero(4 * P)});
  }

  const double shifts[3] = {0.0, -0.5, -1.0};
  if (q > 0) {
    // t = |w| / 2Z feeds the first hat layer; acc_0 = t.
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(16 * P));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(8 * P);
    for (Index p = 0; p < P; ++p)
      for (Index chain = 0; chain < 2; ++chain)
        for (Index j = 0; j < 4; ++j) {
          const Index row = hat(p, chain, j);
          t.emplace_back(row, 4 * p + 2 * chain, w_t);
          t.emplace_back(row, 4 * p + 2 * chain + 1, w_t);
          if (j < 3)
            b(row) = shifts[j];
        }
    layers.push_back({from_triplets(8 * P, 4 * P, t), std::move(b)});
  }

  // g_{s+1} = 2 h_0 - 4 h_1 + 2 h_2, acc_{s+1} = h_3 - g_{s+1} / 4^{s+1}.
  const double g_w[3] = {2.0, -4.0, 2.0};
  for (Index s = 1; s < q; ++s) {
    const double scale = std::ldexp(1.0, static_cast<int>(-2 * s));
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(32 * P));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(8 * P);
    for (Index p = 0; p < P; ++p)
      for (Index chain = 0; chain < 2; ++chain) {
        for (Index j = 0; j < 3; ++j) {
          const Index row = hat(p, chain, j);
          for (Index h = 0; h < 3; ++h)
            t.emplace_back(row, hat(p, chain, h), g_w[h]);
          b(row) = shifts[j];
        }
        const Index acc = hat(p, chain, 3);
        for (Index h = 0; h < 3; ++h)
          t.emplace_back(acc, hat(p, chain, h), -scale * g_w[h]);
        t.emplace_back(acc, hat(p, chain, 3), 1.0);
      }
    layers.push_back({from_triplets(8 * P, 8 * P, t), std::move(b)});
  }

  // Output Z^2 (acc_q(u) - acc_q(v)) summed over the inner index.
  {
    const double z2 = Z * Z;
    std::vector<Triplet> t;
    for (Index c = 0; c < k; ++c)
      for (Index r = 0; r < m; ++r)
        for (Index s = 0; s < n; ++s) {
          const Index p = (c * m + r) * n + s;
          const Index out = r + c * m;
          if (q == 0) {
            const double w = z2 * w_t;
            t.emplace_back(out, 4 * p, w);
            t.emplace_back(out, 4 * p + 1, w);
            t.emplace_back(out, 4 * p + 2, -w);
            t.emplace_back(out, 4 * p + 3, -w);
            continue;
          }
          const double scale = std::ldexp(1.0, static_cast<int>(-2 * q));
          for (Index h = 0; h < 4; ++h)
            for (Index chain = 0; chain < 2; ++chain) {
              const double sign = chain == 0 ? 1.0 : -1.0;
              const double w = h < 3 ? -scale * g_w[h] : 1.0;
              t.emplace_back(out, hat(p, chain, h), sign * z2 * w);
            }
        }
    const Index width = q == 0 ? 4 * P : 8 * P;
    layers.push_back({from_triplets(m * k, width, t), Eigen::VectorXd::Zero(m * k)});
  }
  return ReluNetwork(std::move(layers));
}

PowerSchedule power_schedule(Index i, double eps, double delta)
{
  if (i < 1 || !(eps > 0.0 && eps < 0.25) || !(delta > 0.0 && delta < 1.0))
    throw ConfigError("power_net: need i >= 1, eps in (0, 1/4) and delta in (0, 1)");
  PowerSchedule sch;
  sch.tolerances.resize(static_cast<std::size_t>(i));
  for (Index j = 1; j <= i; ++j)
    sch.tolerances[static_cast<std::size_t>(j - 1)] =
      eps * std::pow(3.0, static_cast<double>(j - i)) / 2.0;

  for (;;) {
    sch.bounds.assign(static_cast<std::size_t>(i), 0.0);
    sch.errors.assign(static_cast<std::size_t>(i), 0.0);
    double a = 1.0 - delta;
    double E = 0.0;
    for (Index j = 1; j <= i; ++j) {
      const auto u = static_cast<std::size_t>(j - 1);
      sch.bounds[u] = a + E;
      E = (2.0 * a + E) * E + sch.tolerances[u];
      sch.errors[u] = E;
      a *= a;
    }
    if (E <= eps)
      return sch;
    for (double &tau : sch.tolerances)
      tau /= 2.0;
  }
}

ReluNetwork power_net(Index i, double eps, double delta, Index n)
{
  const PowerSchedule sch = power_schedule(i, eps, delta);
  const ReluNetwork dup = duplicate_input(n * n, 2);
  ReluNetwork net;
  for (Index j = 0; j < i; ++j) {
    const auto u = static_cast<std::size_t>(j);
    ReluNetwork stage = concat(mult_net(sch.bounds[u], n, n, n, sch.tolerances[u]), dup);
    net = j == 0 ? std::move(stage) : sparse_concat(stage, net);
  }
  return net;
}

Index InverseNetConfig::stages() const
{
  validate();
  const double steps = std::log(delta * epsilon / 2.0) / std::log(1.0 - delta);
  return std::max<Index>(1, static_cast<Index>(std::ceil(std::log2(steps + 1.0))));
}

double InverseNetConfig::mult_tolerance(Index i) const
{
  return std::pow(5.0, static_cast<double>(i - stages() - 1)) * epsilon / 2.0;
}

double InverseNetConfig::power_tolerance(Index i) const
{
  return std::pow(5.0, static_cast<double>(i - stages() - 1)) * delta * epsilon / 2.0;
}

void InverseNetConfig::validate() const
{
  if (!(epsilon > 0.0 && epsilon < 0.25))
    throw ConfigError("inverse_net: epsilon must lie in (0, 1/4), got " +
                      std::to_string(epsilon));
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("inverse_net: delta must lie in (0, 1), got " + std::to_string(delta));
}

ReluNetwork inverse_net(const InverseNetConfig &cfg, Index n)
{
  const Index l = cfg.stages();
  const Index n2 = n * n;
  const ReluNetwork shift = ReluNetwork::affine(sparse_identity(n2),
                                                vec(Eigen::MatrixXd::Identity(n, n)));
  ReluNetwork pi = shift;
  for (Index i = 2; i <= l; ++i) {
    const ReluNetwork factor =
      sparse_concat(shift, power_net(i - 1, cfg.power_tolerance(i), cfg.delta, n));
    pi = sparse_concat(mult_net(cfg.z2(), n, n, n, cfg.mult_tolerance(i)),
                       parallelize({pi, factor}));
  }
  return concat(pi, duplicate_input(n2, l));
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> neumann_product_check(const Eigen::MatrixXd &A,
                                                                  Index l)
{
  if (A.rows() != A.cols())
    throw DimensionError("neumann_product_check: A is " + shape(A.rows(), A.cols()));
  if (l < 0 || l > 30)
    throw ConfigError("neumann_product_check: l must lie in [0, 30]");
  const Index n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  Eigen::MatrixXd sum = I;
  Eigen::MatrixXd power = I;
  for (Index i = 1; i < (Index{1} << l); ++i) {
    power = power * A;
    sum += power;
  }
  Eigen::MatrixXd product = I;
  Eigen::MatrixXd square = A;
  for (Index i = 0; i < l; ++i) {
    product = product * (square + I);
    square = square * square;
  }
  return {sum, product};
}

namespace
{

// The inverse network needs its tolerance below 1/4 and the multiplication
// network below 1; tightening a tolerance never weakens the error bound.
constexpr double kInverseTolCap = 0.2;
constexpr double kMultTolCap = 0.5;

} // namespace

void ParametricNetConfig::validate() const
{
  if (!(beta > 0.0 && beta < alpha))
    throw ConfigError("parametric net: need 0 < beta < alpha, got alpha=" +
                      std::to_string(alpha) + ", beta=" + std::to_string(beta));
  if (!(gamma > 0.0))
    throw ConfigError("parametric net: gamma must be positive");
}

BtbSchedule ParametricNetConfig::btb_schedule(double eps) const
{
  validate();
  if (!(eps > 0.0 && eps < 0.25))
    throw ConfigError("btb_inverse_net: eps must lie in (0, 1/4)");
  const double a = alpha, b = beta, b2 = beta * beta, b4 = b2 * b2;
  BtbSchedule s;
  s.eps1 = std::min({eps * b4 / (24.0 * a), b2 * std::sqrt(eps) / 4.0, b2 / (12.0 * a), b / 3.0});
  s.eps2 = std::min({b4 * eps / 12.0, b2 / 6.0, kMultTolCap});
  s.z = a + s.eps1;
  s.inverse.epsilon = std::min(eps / (2.0 * lambda()), kInverseTolCap);
  s.inverse.delta = delta() / 2.0;
  return s;
}

ParametricSchedule ParametricNetConfig::parametric_schedule(double eps) const
{
  validate();
  if (!(eps > 0.0 && eps < 0.25))
    throw ConfigError("parametric_map_net: eps must lie in (0, 1/4)");
  const double a = alpha, b = beta, g = gamma, b2 = beta * beta;
  ParametricSchedule s;
  s.eps1 = std::min({eps * b2 / (12.0 * g), b * std::sqrt(eps) / 4.0, a / 4.0,
                     std::sqrt(a * g) / 2.0});
  s.eps2 = std::min({eps * b2 / (12.0 * a), b * std::sqrt(eps) / 4.0, g / 4.0,
                     std::sqrt(a * g) / 2.0});
  s.eps3 = std::min({eps * b2 / 12.0, a * g / 4.0, kMultTolCap});
  s.eps4 = std::min(eps / (6.0 * a * g), kInverseTolCap);
  s.eps4_1 = btb_schedule(s.eps4).eps1;
  s.eps5 = eps / 3.0;
  s.z1 = a + g + s.eps1 + s.eps2;
  s.z2 = s.eps4 + 1.0 / b2 + a * s.eps2 + (g + s.eps2) * s.eps1 + s.eps3 + a * g;
  return s;
}

ReluNetwork btb_inverse_net(const ReluNetwork &phi_b, const ReluNetwork &phi_bt, Index n_pod,
                            const ParametricNetConfig &cfg, double eps)
{
  if (n_pod < 1 || phi_b.output_dim() % n_pod != 0 ||
      phi_bt.output_dim() != phi_b.output_dim() || phi_bt.input_dim() != phi_b.input_dim())
    throw DimensionError("btb_inverse_net: B networks do not describe N x " +
                         std::to_string(n_pod) + " matrices on a common input");
  const BtbSchedule s = cfg.btb_schedule(eps);
  const Index N = phi_b.output_dim() / n_pod;
  const Index p = phi_b.input_dim();

  const ReluNetwork btb =
    sparse_concat(mult_net(s.z, n_pod, N, n_pod, s.eps2),
                  concat(parallelize({phi_bt, phi_b}), duplicate_input(p, 2)));
  const double lambda = cfg.lambda();
  const ReluNetwork contraction =
    scale_output(btb, -lambda, vec(Eigen::MatrixXd::Identity(n_pod, n_pod)));
  const ReluNetwork inv = sparse_concat(inverse_net(s.inverse, n_pod), contraction);
  return scale_output(inv, lambda, Eigen::VectorXd::Zero(n_pod * n_pod));
}

ParametricMapNets parametric_map_net(const ReluNetwork &phi_b, const ReluNetwork &phi_bt,
                                     const ReluNetwork &phi_fg, Index n_pod,
                                     const ParametricNetConfig &cfg, double eps)
{
  if (phi_fg.input_dim() != phi_b.input_dim() || phi_fg.output_dim() * n_pod != phi_bt.output_dim())
    throw DimensionError("parametric_map_net: fg network does not match the B networks");
  ParametricMapNets out;
  out.schedule = cfg.parametric_schedule(eps);
  const ParametricSchedule &s = out.schedule;
  const Index N = phi_fg.output_dim();
  const Index p = phi_b.input_dim();

  out.bt_fg = sparse_concat(mult_net(s.z1, n_pod, N, 1, s.eps3),
                            concat(parallelize({phi_bt, phi_fg}), duplicate_input(p, 2)));
  out.btb_inverse = btb_inverse_net(phi_b, phi_bt, n_pod, cfg, s.eps4);
  out.network =
    sparse_concat(mult_net(s.z2, n_pod, n_pod, 1, s.eps5),
                  concat(parallelize({out.btb_inverse, out.bt_fg}), duplicate_input(p, 2)));
  return out;
}

AffineBNetworks affine_b_network(const rom::AffineReducedOperator &op)
{
  const auto &parts = op.components();
  const Index N = parts.front().rows();
  const Index n_pod = parts.front().cols();
  const Index p = op.param_dim();

  std::vector<Triplet> tb, tbt;
  Eigen::VectorXd b(N * n_pod), bt(N * n_pod);
  for (Index c = 0; c < n_pod; ++c)
    for (Index r = 0; r < N; ++r) {
      const Index ib = r + c * N;
      const Index ibt = c + r * n_pod;
      b(ib) = parts[0](r, c);
      bt(ibt) = parts[0](r, c);
      for (Index j = 0; j < p; ++j) {
        const double w = parts[static_cast<std::size_t>(j + 1)](r, c);
        if (w != 0.0) {
          tb.emplace_back(ib, j, w);
          tbt.emplace_back(ibt, j, w);
        }
      }
    }
  return {ReluNetwork::affine(from_triplets(N * n_pod, p, tb), std::move(b)),
          ReluNetwork::affine(from_triplets(N * n_pod, p, tbt), std::move(bt))};
}

ReluNetwork constant_network(Index p, const Eigen::VectorXd &value)
{
  return ReluNetwork::affine(SparseRowMatrix(value.size(), p), value);
}

} // namespace podnn::netcalc
