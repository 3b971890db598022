// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "podnn/dnn.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace podnn::dnn
{

namespace
{

struct Activations
{
  std::vector<Eigen::MatrixXd> pre;   // z_i, i = 1..L
  std::vector<Eigen::MatrixXd> post;  // a_0 = x, a_i = relu(z_i) for hidden i
};

// x: features x batch. Output n_out x batch.
Eigen::MatrixXd forward_columns(const MlpModel &model, const Eigen::MatrixXd &x, Activations *cache)
{
  Eigen::MatrixXd a = x;
  const Index layers = model.n_layers();
  if (cache != nullptr)
  {
    cache->pre.resize(static_cast<std::size_t>(layers));
    cache->post.resize(static_cast<std::size_t>(layers));
  }
  for (Index l = 0; l < layers; ++l)
  {
    const auto k = static_cast<std::size_t>(l);
    Eigen::MatrixXd z = model.weights[k] * a;
    z.colwise() += model.biases[k];
    if (cache != nullptr)
      cache->post[k] = std::move(a);
    if (l + 1 == layers)
      return z;
    a = z.cwiseMax(0.0);
    if (cache != nullptr)
      cache->pre[k] = std::move(z);
  }
  return a;
}

// Loss and dLoss/dpred for column-major pred/target (n_out x batch).
double loss_columns(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &target,
                    Eigen::MatrixXd *dpred)
{
  const Index m = pred.cols();
  double total = 0.0;
  if (dpred != nullptr)
    dpred->resize(pred.rows(), m);
  for (Index j = 0; j < m; ++j)
  {
    const double tn = target.col(j).norm();
    if (!(tn > 0.0))
      throw Error("relative_error_loss: target row " + std::to_string(j) + " has zero norm");
    const double rn = (pred.col(j) - target.col(j)).norm();
    total += rn / tn;
    if (dpred != nullptr)
    {
      if (rn > 0.0)
        dpred->col(j) = (pred.col(j) - target.col(j)) / (rn * tn * static_cast<double>(m));
      else
        dpred->col(j).setZero();
    }
  }
  return total / static_cast<double>(m);
}

double loss_and_gradient(const MlpModel &model, const Eigen::MatrixXd &x, const Eigen::MatrixXd &t,
                         Gradients &grads)
{
  Activations cache;
  const Eigen::MatrixXd pred = forward_columns(model, x, &cache);
  Eigen::MatrixXd delta;
  const double loss = loss_columns(pred, t, &delta);
  for (Index l = model.n_layers() - 1; l >= 0; --l)
  {
    const auto k = static_cast<std::size_t>(l);
    grads.weights[k].noalias() = delta * cache.post[k].transpose();
    grads.biases[k] = delta.rowwise().sum();
    if (l == 0)
      break;
    Eigen::MatrixXd back = model.weights[k].transpose() * delta;
    delta = (cache.pre[k - 1].array() > 0.0).select(back, 0.0);
  }
  return loss;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd &features, const std::vector<Index> &cols,
                               std::size_t begin, std::size_t end)
{
  Eigen::MatrixXd out(features.rows(), static_cast<Index>(end - begin));
  for (std::size_t j = begin; j < end; ++j)
    out.col(static_cast<Index>(j - begin)) = features.col(cols[j]);
  return out;
}

void check_rows(const Eigen::MatrixXd &inputs, const MlpModel &model)
{
  if (inputs.cols() != model.input_dim())
    throw DimensionError("network expects " + std::to_string(model.input_dim()) +
                         " inputs per row, got " + std::to_string(inputs.cols()));
}

} // namespace

MlpModel MlpModel::zeros(const std::vector<Index> &widths)
{
  if (widths.size() < 2)
    throw ConfigError("MlpModel needs at least input and output widths");
  MlpModel model;
  model.widths = widths;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l)
  {
    if (widths[l] < 1 || widths[l + 1] < 1)
      throw ConfigError("MlpModel widths must be positive");
    model.weights.push_back(Eigen::MatrixXd::Zero(widths[l + 1], widths[l]));
    model.biases.push_back(Eigen::VectorXd::Zero(widths[l + 1]));
  }
  return model;
}

MlpModel MlpModel::he_uniform(const std::vector<Index> &widths, std::uint64_t seed)
{
  MlpModel model = zeros(widths);
  std::mt19937_64 rng(seed);
  for (auto &w : model.weights)
  {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.cols()));
    // Draws are consumed in column-major order; uniform from the top 53 bits.
    for (Index j = 0; j < w.size(); ++j)
      w.data()[j] = limit * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
  }
  return model;
}

Index MlpModel::parameter_count() const
{
  Index count = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    count += weights[l].size() + biases[l].size();
  return count;
}

void MlpModel::validate() const
{
  if (widths.size() != weights.size() + 1 || biases.size() != weights.size() || weights.empty())
    throw DimensionError("MlpModel: layer count does not match widths");
  for (std::size_t l = 0; l < weights.size(); ++l)
  {
    if (weights[l].rows() != widths[l + 1] || weights[l].cols() != widths[l] ||
        biases[l].size() != widths[l + 1])
      throw DimensionError("MlpModel: layer " + std::to_string(l) + " has inconsistent shape");
    if (!weights[l].allFinite() || !biases[l].allFinite())
      throw Error("MlpModel: layer " + std::to_string(l) + " has non-finite parameters");
  }
  if (input_lower.size() != input_upper.size() ||
      (input_lower.size() != 0 && input_lower.size() != widths.front()))
    throw DimensionError("MlpModel: normalization box does not match the input width");
  if (normalizes() && !((input_upper - input_lower).array() > 0.0).all())
    throw ConfigError("MlpModel: empty normalization box");
}

Eigen::MatrixXd MlpModel::features(const Eigen::MatrixXd &inputs) const
{
  Eigen::MatrixXd x = inputs.transpose();
  if (normalizes())
  {
    const Eigen::ArrayXd scale = 2.0 / (input_upper - input_lower).array();
    x = ((x.colwise() - input_lower).array().colwise() * scale - 1.0).matrix();
  }
  return x;
}

Eigen::MatrixXd forward(const MlpModel &model, const Eigen::MatrixXd &inputs)
{
  check_rows(inputs, model);
  return forward_columns(model, model.features(inputs), nullptr).transpose();
}

double relative_error_loss(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &target)
{
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw DimensionError("relative_error_loss: shape mismatch");
  if (pred.rows() == 0)
    throw DimensionError("relative_error_loss: empty batch");
  return loss_columns(pred.transpose(), target.transpose(), nullptr);
}

Gradients Gradients::zeros_like(const MlpModel &model)
{
  Gradients g;
  for (std::size_t l = 0; l < model.weights.size(); ++l)
  {
    g.weights.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
  }
  return g;
}

Gradients gradient(const MlpModel &model, const Eigen::MatrixXd &inputs,
                   const Eigen::MatrixXd &targets, double *loss)
{
  check_rows(inputs, model);
  if (targets.rows() != inputs.rows() || targets.cols() != model.output_dim())
    throw DimensionError("gradient: target shape mismatch");
  Gradients grads = Gradients::zeros_like(model);
  const double value =
    loss_and_gradient(model, model.features(inputs), targets.transpose(), grads);
  if (loss != nullptr)
    *loss = value;
  return grads;
}

void TrainConfig::validate(Index n_train) const
{
  if (!(lr > 0.0))
    throw ConfigError("learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < beta2 && beta2 < 1.0))
    throw ConfigError("Adam moments need 0 < beta1 < beta2 < 1");
  if (!(eps_adam > 0.0))
    throw ConfigError("Adam epsilon must be positive");
  if (batch_size < 1 || batch_size > n_train)
    throw ConfigError("batch size must lie in [1, n_train]");
  if (n_epochs < 1 || patience < 0)
    throw ConfigError("n_epochs must be positive and patience non-negative");
  for (Index w : hidden)
    if (w < 1)
      throw ConfigError("hidden widths must be positive");
}

AdamState AdamState::zeros_like(const MlpModel &model)
{
  return {Gradients::zeros_like(model), Gradients::zeros_like(model), 0};
}

namespace
{

template <typename Param, typename Moment>
void adam_step(Param &theta, Moment &m, Moment &v, const Moment &g, const TrainConfig &c,
               double correction1, double correction2)
{
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
  theta.array() -= c.lr * (m.array() / correction1) /
                   ((v.array() / correction2).sqrt() + c.eps_adam);
}

} // namespace

void adam_update(MlpModel &model, AdamState &state, const Gradients &grads, const TrainConfig &config)
{
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < model.weights.size(); ++l)
  {
    adam_step(model.weights[l], state.m.weights[l], state.v.weights[l], grads.weights[l], config, c1, c2);
    adam_step(model.biases[l], state.m.biases[l], state.v.biases[l], grads.biases[l], config, c1, c2);
  }
}

Dataset Dataset::with_split(Eigen::MatrixXd inputs, Eigen::MatrixXd targets, double train_fraction,
                            double valid_fraction)
{
  if (!(train_fraction > 0.0 && valid_fraction >= 0.0 && train_fraction + valid_fraction <= 1.0))
    throw ConfigError("split fractions must be non-negative with a positive training share");
  Dataset data;
  data.inputs = std::move(inputs);
  data.targets = std::move(targets);
  const Index n = data.inputs.rows();
  const auto n_train = static_cast<Index>(std::llround(train_fraction * static_cast<double>(n)));
  const auto n_valid = static_cast<Index>(std::llround(valid_fraction * static_cast<double>(n)));
  for (Index i = 0; i < n; ++i)
  {
    if (i < n_train)
      data.train.push_back(i);
    else if (i < n_train + n_valid)
      data.valid.push_back(i);
    else
      data.test.push_back(i);
  }
  data.validate();
  return data;
}

const std::vector<Index> &Dataset::indices(Split split) const
{
  switch (split)
  {
  case Split::Train:
    return train;
  case Split::Valid:
    return valid;
  default:
    return test;
  }
}

Eigen::MatrixXd Dataset::split_inputs(Split split) const
{
  const auto &idx = indices(split);
  Eigen::MatrixXd out(static_cast<Index>(idx.size()), inputs.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Index>(i)) = inputs.row(idx[i]);
  return out;
}

Eigen::MatrixXd Dataset::split_targets(Split split) const
{
  const auto &idx = indices(split);
  Eigen::MatrixXd out(static_cast<Index>(idx.size()), targets.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Index>(i)) = targets.row(idx[i]);
  return out;
}

void Dataset::validate() const
{
  if (inputs.rows() != targets.rows())
    throw DimensionError("Dataset: input and target row counts differ");
  std::set<Index> seen;
  for (const auto *part : {&train, &valid, &test})
    for (Index i : *part)
    {
      if (i < 0 || i >= size())
        throw DimensionError("Dataset: split index out of range");
      if (!seen.insert(i).second)
        throw DimensionError("Dataset: splits overlap at sample " + std::to_string(i));
    }
  if (static_cast<Index>(seen.size()) != size())
    throw DimensionError("Dataset: splits do not cover every sample");
  for (Index i = 0; i < size(); ++i)
    if (!(targets.row(i).norm() > 0.0))
      throw Error("Dataset: target row " + std::to_string(i) + " has zero norm");
}

void shuffle_indices(std::vector<Index> &indices, std::mt19937_64 &rng)
{
  for (std::size_t i = indices.size(); i > 1; --i)
  {
    const std::uint64_t bound = i;
    const std::uint64_t threshold = (0 - bound) % bound;
    std::uint64_t r = rng();
    while (r < threshold)
      r = rng();
    std::swap(indices[i - 1], indices[static_cast<std::size_t>(r % bound)]);
  }
}

TrainResult train(const Dataset &data, const TrainConfig &config, const Eigen::VectorXd &input_lower,
                  const Eigen::VectorXd &input_upper)
{
  data.validate();
  config.validate(static_cast<Index>(data.train.size()));
  if (data.valid.empty())
    throw ConfigError("train: validation split is empty");

  std::vector<Index> widths{data.inputs.cols()};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(data.targets.cols());

  MlpModel model = MlpModel::he_uniform(widths, config.seed);
  model.input_lower = input_lower;
  model.input_upper = input_upper;
  model.validate();

  const Eigen::MatrixXd x_all = model.features(data.inputs);
  const Eigen::MatrixXd t_all = data.targets.transpose();
  const Eigen::MatrixXd x_valid = gather_columns(x_all, data.valid, 0, data.valid.size());
  const Eigen::MatrixXd t_valid = gather_columns(t_all, data.valid, 0, data.valid.size());

  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  AdamState state = AdamState::zeros_like(model);
  Gradients grads = Gradients::zeros_like(model);
  std::vector<Index> order = data.train;

  TrainResult result;
  result.best_valid_loss = std::numeric_limits<double>::infinity();
  Index since_best = 0;
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (Index epoch = 1; epoch <= config.n_epochs; ++epoch)
  {
    shuffle_indices(order, shuffle_rng);
    double weighted = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch)
    {
      const std::size_t end = std::min(order.size(), begin + batch);
      const double loss = loss_and_gradient(model, gather_columns(x_all, order, begin, end),
                                            gather_columns(t_all, order, begin, end), grads);
      if (!std::isfinite(loss))
        throw Error("train: non-finite loss in epoch " + std::to_string(epoch));
      weighted += loss * static_cast<double>(end - begin);
      adam_update(model, state, grads, config);
    }
    LossRecord record;
    record.epoch = epoch;
    record.train_loss = weighted / static_cast<double>(order.size());
    record.valid_loss = loss_columns(forward_columns(model, x_valid, nullptr), t_valid, nullptr);
    if (!std::isfinite(record.valid_loss))
      throw Error("train: non-finite validation loss in epoch " + std::to_string(epoch));
    result.history.push_back(record);

    if (record.valid_loss < result.best_valid_loss)
    {
      result.best_valid_loss = record.valid_loss;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    }
    else if (++since_best > config.patience)
    {
      break;
    }
  }
  return result;
}

double evaluate(const MlpModel &model, const Dataset &data, Split split)
{
  const auto &idx = data.indices(split);
  if (idx.empty())
    throw DimensionError("evaluate: split is empty");
  return relative_error_loss(forward(model, data.split_inputs(split)), data.split_targets(split));
}

} // namespace podnn::dnn
