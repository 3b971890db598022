// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PODNN_DNN_HPP
#define PODNN_DNN_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "podnn/types.hpp"

namespace podnn::dnn
{

// Fully connected network with ReLU on the hidden layers and an affine output
// layer. Layer i maps widths[i] -> widths[i+1]. When input_lower/input_upper are
// set, inputs are first mapped affinely from that box onto [-1, 1]^p.
struct MlpModel
{
  std::vector<Index> widths;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd input_lower;
  Eigen::VectorXd input_upper;

  // He-uniform weights U(-sqrt(6 / fan_in), sqrt(6 / fan_in)), zero biases.
  static MlpModel he_uniform(const std::vector<Index> &widths, std::uint64_t seed);
  static MlpModel zeros(const std::vector<Index> &widths);

  Index n_layers() const { return static_cast<Index>(weights.size()); }
  Index input_dim() const { return widths.front(); }
  Index output_dim() const { return widths.back(); }
  Index parameter_count() const;
  bool normalizes() const { return input_lower.size() > 0; }

  // Throws on broken shape chains or non-finite parameters.
  void validate() const;
  // Column-major features x batch view of row-major m x p parameters.
  Eigen::MatrixXd features(const Eigen::MatrixXd &inputs) const;
};

// inputs m x p -> outputs m x n_out
Eigen::MatrixXd forward(const MlpModel &model, const Eigen::MatrixXd &inputs);

// Mean over rows of ||pred_i - target_i|| / ||target_i||.
double relative_error_loss(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &target);

struct Gradients
{
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static Gradients zeros_like(const MlpModel &model);
};

// Reverse-mode gradient of relative_error_loss(forward(model, inputs), targets).
// ReLU'(0) = 0, and a row with pred_i = target_i contributes zero.
Gradients gradient(const MlpModel &model, const Eigen::MatrixXd &inputs,
                   const Eigen::MatrixXd &targets, double *loss = nullptr);

struct TrainConfig
{
  std::vector<Index> hidden{500, 500};
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  Index batch_size = 100;
  Index n_epochs = 2000;
  Index patience = 500;
  std::uint64_t seed = 0;

  void validate(Index n_train) const;
};

struct AdamState
{
  Gradients m;
  Gradients v;
  std::int64_t step = 0;

  static AdamState zeros_like(const MlpModel &model);
};

// One Adam step with bias correction, in place.
void adam_update(MlpModel &model, AdamState &state, const Gradients &grads, const TrainConfig &config);

enum class Split
{
  Train,
  Valid,
  Test
};

struct Dataset
{
  Eigen::MatrixXd inputs;   // n_data x p
  Eigen::MatrixXd targets;  // n_data x n_out
  std::vector<Index> train;
  std::vector<Index> valid;
  std::vector<Index> test;

  // Consecutive blocks of the sample order with the given fractions; the test
  // block takes the remainder.
  static Dataset with_split(Eigen::MatrixXd inputs, Eigen::MatrixXd targets, double train_fraction,
                            double valid_fraction);

  Index size() const { return inputs.rows(); }
  const std::vector<Index> &indices(Split split) const;
  Eigen::MatrixXd split_inputs(Split split) const;
  Eigen::MatrixXd split_targets(Split split) const;
  // Disjoint exhaustive splits, matching row counts, non-zero target rows.
  void validate() const;
};

struct LossRecord
{
  Index epoch = 0;
  double train_loss = 0.0;  // sample-weighted mean of the mini-batch losses
  double valid_loss = 0.0;  // loss of the end-of-epoch parameters
};

struct TrainResult
{
  MlpModel model;  // parameters with the smallest validation loss
  std::vector<LossRecord> history;
  Index best_epoch = 0;
  double best_valid_loss = 0.0;
};

// Fisher-Yates shuffle with unbiased bounded draws from the 64-bit engine, so
// the permutation depends only on the engine state.
void shuffle_indices(std::vector<Index> &indices, std::mt19937_64 &rng);

// Mini-batch Adam over the training split, reshuffled every epoch, input
// normalization set from `input_lower`/`input_upper` (if non-empty). Stops after
// n_epochs or when the validation loss has not improved for more than
// `patience` consecutive epochs.
TrainResult train(const Dataset &data, const TrainConfig &config,
                  const Eigen::VectorXd &input_lower = {}, const Eigen::VectorXd &input_upper = {});

// Mean per-sample relative error over a split.
double evaluate(const MlpModel &model, const Dataset &data, Split split);

} // namespace podnn::dnn

#endif // PODNN_DNN_HPP
