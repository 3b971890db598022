// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PODNN_PIPELINE_HPP
#define PODNN_PIPELINE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "podnn/dnn.hpp"
#include "podnn/io.hpp"
#include "podnn/pod.hpp"
#include "podnn/problems.hpp"
#include "podnn/rbf_fd.hpp"
#include "podnn/rom.hpp"

namespace podnn::pipeline
{

// Raised by offline stages; the store keeps whatever earlier stages wrote.
class StageError : public Error
{
public:
  StageError(std::string stage, const std::string &what)
    : Error("stage '" + stage + "': " + what), stage_(std::move(stage))
  {
  }
  const std::string &stage() const { return stage_; }

private:
  std::string stage_;
};

struct RunConfig
{
  std::string domain = "flower";      // "flower" or "circle"
  double domain_radius = 1.0;         // circle only
  Index n_nodes = 1200;
  std::uint64_t node_seed = 1;
  Index candidate_factor = 8;
  double kernel_shape = 3.0;
  Index n_loc = 13;
  ParamVec box_lower = problems::helmholtz_box().lower;
  ParamVec box_upper = problems::helmholtz_box().upper;
  Index n_s = 100;
  std::string sampling = "grid";      // "grid" (n_s = k^p) or "uniform"
  std::uint64_t snapshot_seed = 3;
  double eps_pod = 1e-6;
  Index n_data = 2000;
  double train_fraction = 0.6;
  double valid_fraction = 0.2;
  std::uint64_t data_seed = 2;
  dnn::TrainConfig train;
  std::string output_dir = "podnn_out";
  int threads = 1;
  bool reject_outside = true;

  problems::ParamBox box() const { return {box_lower, box_upper}; }
  // Throws ConfigError.
  void validate() const;

  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json &j);
  static RunConfig load(const std::string &path);
};

inline const std::vector<std::string> kStages{"nodes", "snapshots", "pod", "dataset", "train"};

// Hash of everything a stage's output depends on, chained through the
// upstream stages. Output directory and thread count are excluded.
std::string stage_hash(const RunConfig &config, const std::string &stage);

// Parameter samples. Grid: k points per axis including the endpoints, first
// axis slowest. Uniform: i.i.d. draws from the seeded engine.
std::vector<ParamVec> grid_samples(const problems::ParamBox &box, Index k);
std::vector<ParamVec> uniform_samples(const problems::ParamBox &box, Index count,
                                      std::uint64_t seed);
std::vector<ParamVec> snapshot_params(const RunConfig &config);

// Everything needed to solve the high-fidelity problem for any mu.
struct HighFidelityModel
{
  geometry::NodeSet nodes;
  geometry::StencilSet stencils;
  rbf::ParametricOperator op;
  rbf::AffineOperatorRows rows;

  HighFidelityModel(geometry::NodeSet nodes, const RunConfig &config);
  rbf::HighFidelitySystem system(const ParamVec &mu) const;
  Eigen::VectorXd solve(const ParamVec &mu) const;
};

geometry::NodeSet make_nodes(const RunConfig &config);

// Column j = solve(params[j]); fanned out over `threads` workers, output order
// fixed by index.
Eigen::MatrixXd solve_many(const HighFidelityModel &hf, const std::vector<ParamVec> &params,
                           int threads);

struct StageOutcome
{
  std::string stage;
  bool skipped = false;   // complete in the store with a matching hash
  double seconds = 0.0;
};

struct OfflineResult
{
  std::vector<StageOutcome> stages;
};

// Runs the stages up to and including `last_stage`. Each stage is skipped
// when the store already holds its outputs for the same configuration hash.
OfflineResult offline(const RunConfig &config, io::ArtifactStore &store,
                      const std::string &last_stage = "train");

// The store layout; stage artifacts live under their stage name.
RunConfig stored_config(const io::ArtifactStore &store);

struct OnlineResult
{
  Eigen::MatrixXd solutions;  // m x N
  Eigen::MatrixXd coefficients;  // m x n_pod
  double seconds = 0.0;
};

// One forward pass for the whole batch (m x p), then multiplication by V.
// Parameters outside the box raise ConfigError, or only warn when
// reject_outside is false.
OnlineResult online(const io::ArtifactStore &store, const Eigen::MatrixXd &params,
                    bool reject_outside = true);

struct MethodResult
{
  std::string method;
  double mean_relative_error = 0.0;
  double seconds = 0.0;
  Index n_params = 0;
};

struct BenchmarkReport
{
  std::vector<MethodResult> methods;   // rbf_fd, reduced_ls, pod_dnn
  bool ordering_holds = false;         // pod_dnn < reduced_ls < rbf_fd in time
  void write_csv(std::ostream &out) const;
};

// Mean relative l2 error of each row of `approx` against `truth` (both m x N).
double mean_relative_error(const Eigen::MatrixXd &approx, const Eigen::MatrixXd &truth);

// RBF-FD (rows + rhs + sparse solve per mu), reduced least squares (affine
// reduced assembly + QR per mu) and POD-DNN (one batch forward pass + V) on
// the test split. Artifact loading and mu-independent precomputation are not
// timed.
BenchmarkReport benchmark(const io::ArtifactStore &store);

struct GridSpec
{
  std::vector<Index> layers;     // hidden layer counts
  std::vector<Index> widths;
  std::vector<Index> epochs;
  std::vector<Index> batches;
  std::vector<double> lrs;
  Index size() const;
};

struct GridRow
{
  Index layers = 0;
  Index width = 0;
  Index epochs = 0;
  Index batch = 0;
  double lr = 0.0;
  double test_error = 0.0;
  double train_seconds = 0.0;
  std::string error;    // non-empty if the cell failed
};

// Trains every cell on the stored dataset with the base configuration's seed,
// patience and Adam constants. A failing cell is recorded and the grid goes on.
std::vector<GridRow> hyperparameter_grid(const io::ArtifactStore &store,
                                         const dnn::TrainConfig &base, const GridSpec &grid);
void write_grid_csv(const std::vector<GridRow> &rows, std::ostream &out);

struct VerifySpec
{
  Index draws = 500;
  std::uint64_t seed = 7;
};

struct VerifyRow
{
  std::string construct;
  double eps = 0.0;
  double delta = 0.0;
  Index n = 0;
  Index order = 0;     // i for power_net, l for inverse_net, 0 otherwise
  double measured_error = 0.0;
  bool bound_ok = false;
  Index L = 0;
  Index M = 0;
};

// Monte-Carlo sup-error estimates over the admissible sets (half of the draws
// on the boundary of the norm ball) for identity, mult, power and inverse
// networks, plus the Neumann product identity.
std::vector<VerifyRow> netcalc_verify(const VerifySpec &spec);
void write_verify_csv(const std::vector<VerifyRow> &rows, std::ostream &out);

// Singular values of snapshot matrices with n_s = k^p grid samples for each k
// (nodes and operator from the config).
std::vector<pod::DecayScenario> decay_scenarios(const RunConfig &config,
                                                const std::vector<Index> &grid_sizes);

} // namespace podnn::pipeline

#endif // PODNN_PIPELINE_HPP
