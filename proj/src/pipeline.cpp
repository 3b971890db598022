// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "podnn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "podnn/log.hpp"
#include "podnn/netcalc.hpp"

namespace podnn::pipeline
{

using nlohmann::json;

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double unit_draw(std::mt19937_64 &rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

json param_json(const ParamVec &v)
{
  return std::vector<double>(v.data(), v.data() + v.size());
}

ParamVec param_from_json(const json &j)
{
  auto values = j.get<std::vector<double>>();
  return Eigen::Map<const ParamVec>(values.data(), static_cast<Index>(values.size()));
}

Eigen::MatrixXd params_matrix(const std::vector<ParamVec> &params, Index p)
{
  Eigen::MatrixXd M(static_cast<Index>(params.size()), p);
  for (std::size_t i = 0; i < params.size(); ++i)
    M.row(static_cast<Index>(i)) = params[i].transpose();
  return M;
}

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// handled by exactly one worker; the first exception is rethrown.
template <typename Body>
void parallel_for(Index count, int threads, Body body)
{
  const int workers = static_cast<int>(std::clamp<Index>(threads, 1, std::max<Index>(count, 1)));
  if (workers == 1)
  {
    for (Index i = 0; i < count; ++i)
      body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try
      {
        for (Index i = w; i < count; i += workers)
          body(i);
      }
      catch (...)
      {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  for (auto &t : pool)
    t.join();
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

std::string pad_csv(double v)
{
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

} // namespace

// ---------------------------------------------------------------------------
// RunConfig

void RunConfig::validate() const
{
  auto fail = [](const std::string &m) { throw ConfigError("config: " + m); };
  if (domain != "flower" && domain != "circle")
    fail("domain must be 'flower' or 'circle'");
  if (!(domain_radius > 0.0))
    fail("domain_radius must be positive");
  if (n_nodes < 20)
    fail("n_nodes must be at least 20");
  if (candidate_factor < 1)
    fail("candidate_factor must be positive");
  if (!(kernel_shape > 0.0))
    fail("kernel_shape must be positive");
  if (n_loc < 3 || n_loc > n_nodes)
    fail("n_loc must be in [3, n_nodes]");
  if (box_lower.size() != 2 || box_upper.size() != 2)
    fail("the Helmholtz problem has two parameters");
  if (!(box_lower.array() < box_upper.array()).all())
    fail("box_lower must be below box_upper");
  if (n_s < 1)
    fail("n_s must be positive");
  if (sampling == "grid")
  {
    const auto k = static_cast<Index>(std::llround(std::pow(static_cast<double>(n_s), 0.5)));
    if (k * k != n_s || k < 2)
      fail("grid sampling needs n_s = k^2 with k >= 2");
  }
  else if (sampling != "uniform")
    fail("sampling must be 'grid' or 'uniform'");
  if (!(eps_pod > 0.0 && eps_pod < 1.0))
    fail("eps_pod must be in (0, 1)");
  if (n_data < 3)
    fail("n_data must be at least 3");
  if (!(train_fraction > 0.0 && valid_fraction > 0.0 && train_fraction + valid_fraction < 1.0))
    fail("split fractions must be positive and sum to 1 with the test share");
  if (threads < 1)
    fail("threads must be positive");
  train.validate(static_cast<Index>(std::floor(train_fraction * static_cast<double>(n_data))));
}

json RunConfig::to_json() const
{
  return {{"domain", domain},
          {"domain_radius", domain_radius},
          {"n_nodes", n_nodes},
          {"node_seed", node_seed},
          {"candidate_factor", candidate_factor},
          {"kernel_shape", kernel_shape},
          {"n_loc", n_loc},
          {"box_lower", param_json(box_lower)},
          {"box_upper", param_json(box_upper)},
          {"n_s", n_s},
          {"sampling", sampling},
          {"snapshot_seed", snapshot_seed},
          {"eps_pod", eps_pod},
          {"n_data", n_data},
          {"train_fraction", train_fraction},
          {"valid_fraction", valid_fraction},
          {"data_seed", data_seed},
          {"train", io::train_config_json(train)},
          {"output_dir", output_dir},
          {"threads", threads},
          {"reject_outside", reject_outside}};
}

RunConfig RunConfig::from_json(const json &j)
{
  if (!j.is_object())
    throw ConfigError("config must be a JSON object");
  RunConfig c;
  try
  {
    for (const auto &[key, v] : j.items())
    {
      if (key == "domain")
        c.domain = v.get<std::string>();
      else if (key == "domain_radius")
        c.domain_radius = v.get<double>();
      else if (key == "n_nodes")
        c.n_nodes = v.get<Index>();
      else if (key == "node_seed")
        c.node_seed = v.get<std::uint64_t>();
      else if (key == "candidate_factor")
        c.candidate_factor = v.get<Index>();
      else if (key == "kernel_shape")
        c.kernel_shape = v.get<double>();
      else if (key == "n_loc")
        c.n_loc = v.get<Index>();
      else if (key == "box_lower")
        c.box_lower = param_from_json(v);
      else if (key == "box_upper")
        c.box_upper = param_from_json(v);
      else if (key == "n_s")
        c.n_s = v.get<Index>();
      else if (key == "sampling")
        c.sampling = v.get<std::string>();
      else if (key == "snapshot_seed")
        c.snapshot_seed = v.get<std::uint64_t>();
      else if (key == "eps_pod")
        c.eps_pod = v.get<double>();
      else if (key == "n_data")
        c.n_data = v.get<Index>();
      else if (key == "train_fraction")
        c.train_fraction = v.get<double>();
      else if (key == "valid_fraction")
        c.valid_fraction = v.get<double>();
      else if (key == "data_seed")
        c.data_seed = v.get<std::uint64_t>();
      else if (key == "train")
      {
        json merged = io::train_config_json(c.train);
        merged.update(v);
        c.train = io::train_config_from_json(merged);
      }
      else if (key == "output_dir")
        c.output_dir = v.get<std::string>();
      else if (key == "threads")
        c.threads = v.get<int>();
      else if (key == "reject_outside")
        c.reject_outside = v.get<bool>();
      else
        throw ConfigError("unknown config key '" + key + "'");
    }
  }
  catch (const json::exception &e)
  {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config " + path);
  try
  {
    return from_json(json::parse(in));
  }
  catch (const json::parse_error &e)
  {
    throw ConfigError("config " + path + ": " + e.what());
  }
}

std::string stage_hash(const RunConfig &c, const std::string &stage)
{
  json part;
  std::string upstream;
  if (stage == "nodes")
    part = {{"domain", c.domain},
            {"domain_radius", c.domain_radius},
            {"n_nodes", c.n_nodes},
            {"node_seed", c.node_seed},
            {"candidate_factor", c.candidate_factor}};
  else if (stage == "snapshots")
  {
    upstream = stage_hash(c, "nodes");
    part = {{"kernel_shape", c.kernel_shape},
            {"n_loc", c.n_loc},
            {"box_lower", param_json(c.box_lower)},
            {"box_upper", param_json(c.box_upper)},
            {"n_s", c.n_s},
            {"sampling", c.sampling},
            {"snapshot_seed", c.snapshot_seed}};
  }
  else if (stage == "pod")
  {
    upstream = stage_hash(c, "snapshots");
    part = {{"eps_pod", c.eps_pod}};
  }
  else if (stage == "dataset")
  {
    upstream = stage_hash(c, "pod");
    part = {{"n_data", c.n_data},
            {"train_fraction", c.train_fraction},
            {"valid_fraction", c.valid_fraction},
            {"data_seed", c.data_seed}};
  }
  else if (stage == "train")
  {
    upstream = stage_hash(c, "dataset");
    part = io::train_config_json(c.train);
  }
  else
    throw ConfigError("unknown stage '" + stage + "'");
  // json objects serialize with sorted keys, so the dump is canonical.
  return io::sha256_hex(stage + "\n" + upstream + "\n" + part.dump());
}

// ---------------------------------------------------------------------------
// Sampling and high-fidelity solves

std::vector<ParamVec> grid_samples(const problems::ParamBox &box, Index k)
{
  if (k < 2)
    throw ConfigError("grid_samples: need at least two points per axis");
  const Index p = box.dim();
  Index total = 1;
  for (Index d = 0; d < p; ++d)
    total *= k;
  std::vector<ParamVec> out;
  out.reserve(static_cast<std::size_t>(total));
  for (Index flat = 0; flat < total; ++flat)
  {
    ParamVec mu(p);
    Index rem = flat;
    for (Index d = p - 1; d >= 0; --d)
    {
      const Index i = rem % k;
      rem /= k;
      mu(d) = box.lower(d) + (box.upper(d) - box.lower(d)) * static_cast<double>(i) /
                               static_cast<double>(k - 1);
    }
    out.push_back(mu);
  }
  return out;
}

std::vector<ParamVec> uniform_samples(const problems::ParamBox &box, Index count,
                                      std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<ParamVec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i)
  {
    ParamVec mu(box.dim());
    for (Index d = 0; d < box.dim(); ++d)
      mu(d) = box.lower(d) + (box.upper(d) - box.lower(d)) * unit_draw(rng);
    out.push_back(mu);
  }
  return out;
}

std::vector<ParamVec> snapshot_params(const RunConfig &config)
{
  if (config.sampling == "grid")
    return grid_samples(config.box(),
                        static_cast<Index>(std::llround(std::sqrt(static_cast<double>(config.n_s)))));
  return uniform_samples(config.box(), config.n_s, config.snapshot_seed);
}

geometry::NodeSet make_nodes(const RunConfig &config)
{
  if (config.domain == "flower")
    return problems::flower_nodes(config.n_nodes, config.node_seed, config.candidate_factor);
  // Same boundary share as the flower set.
  const Index n_boundary = std::max<Index>(
    3, std::lround(289.0 * std::sqrt(static_cast<double>(config.n_nodes) / 5731.0)));
  const Index n_interior = config.n_nodes - n_boundary;
  return geometry::generate_nodes(geometry::PolarDomain::circle(config.domain_radius), n_boundary,
                                  config.candidate_factor * n_interior, n_interior,
                                  config.node_seed);
}

namespace
{

rbf::RbfKernel kernel_of(const RunConfig &config)
{
  rbf::RbfKernel k;
  k.shape = config.kernel_shape;
  return k;
}

} // namespace

HighFidelityModel::HighFidelityModel(geometry::NodeSet nodes_in, const RunConfig &config)
  : nodes(std::move(nodes_in)),
    stencils(geometry::build_stencils(nodes, config.n_loc)),
    op(problems::helmholtz()),
    rows(nodes, stencils, kernel_of(config), rbf::PolyAugmentation::none(), op)
{
}

rbf::HighFidelitySystem HighFidelityModel::system(const ParamVec &mu) const
{
  return {rows.rows(mu), rbf::assemble_rhs(nodes, op, mu)};
}

Eigen::VectorXd HighFidelityModel::solve(const ParamVec &mu) const
{
  return rbf::solve_high_fidelity(system(mu));
}

Eigen::MatrixXd solve_many(const HighFidelityModel &hf, const std::vector<ParamVec> &params,
                           int threads)
{
  Eigen::MatrixXd U(hf.nodes.size(), static_cast<Index>(params.size()));
  parallel_for(static_cast<Index>(params.size()), threads, [&](Index j) {
    const ParamVec &mu = params[static_cast<std::size_t>(j)];
    try
    {
      U.col(j) = hf.solve(mu);
    }
    catch (const Error &e)
    {
      std::ostringstream ss;
      ss << "solve failed at mu = (" << mu.transpose() << "): " << e.what();
      throw Error(ss.str());
    }
  });
  return U;
}

// ---------------------------------------------------------------------------
// Offline phase

RunConfig stored_config(const io::ArtifactStore &store)
{
  return RunConfig::from_json(store.get_json("config.json"));
}

OfflineResult offline(const RunConfig &config, io::ArtifactStore &store,
                      const std::string &last_stage)
{
  config.validate();
  const auto last = std::find(kStages.begin(), kStages.end(), last_stage);
  if (last == kStages.end())
    throw ConfigError("unknown stage '" + last_stage + "'");

  // The stored config carries no output_dir or thread count so identical runs
  // written to different directories produce identical stores.
  json stored = config.to_json();
  stored.erase("output_dir");
  stored.erase("threads");
  if (!store.has("config.json") || store.get_json("config.json") != stored)
    store.put_json("config.json", stored);

  OfflineResult result;
  std::unique_ptr<HighFidelityModel> hf;
  auto high_fidelity = [&]() -> const HighFidelityModel & {
    if (!hf)
      hf = std::make_unique<HighFidelityModel>(io::load_nodes(store, "nodes"), config);
    return *hf;
  };

  for (auto it = kStages.begin(); it != std::next(last); ++it)
  {
    const std::string &stage = *it;
    const std::string hash = stage_hash(config, stage);
    StageOutcome outcome{stage, false, 0.0};
    if (store.stage_complete(stage, hash))
    {
      outcome.skipped = true;
      result.stages.push_back(outcome);
      continue;
    }
    const auto start = Clock::now();
    try
    {
      std::vector<std::string> written;
      if (stage == "nodes")
      {
        auto nodes = make_nodes(config);
        io::save_nodes(store, "nodes", nodes);
      }
      else if (stage == "snapshots")
      {
        const auto params = snapshot_params(config);
        pod::SnapshotMatrix snaps{solve_many(high_fidelity(), params, config.threads), params};
        io::save_snapshots(store, "snapshots", snaps);
      }
      else if (stage == "pod")
      {
        const auto snaps = io::load_snapshots(store, "snapshots");
        io::save_basis(store, "pod", pod::compute_pod(snaps.S, config.eps_pod));
      }
      else if (stage == "dataset")
      {
        const auto basis = io::load_basis(store, "pod");
        const auto params = uniform_samples(config.box(), config.n_data, config.data_seed);
        const Eigen::MatrixXd U = solve_many(high_fidelity(), params, config.threads);
        Eigen::MatrixXd targets = (basis.V.transpose() * U).transpose();
        auto data = dnn::Dataset::with_split(params_matrix(params, config.box().dim()),
                                             std::move(targets), config.train_fraction,
                                             config.valid_fraction);
        io::save_dataset(store, "dataset", data);
      }
      else if (stage == "train")
      {
        const auto data = io::load_dataset(store, "dataset");
        const auto trained = dnn::train(data, config.train, config.box_lower, config.box_upper);
        io::save_model(store, "model", trained.model, config.train);
        store.put_text("model/history.csv", io::history_csv(trained.history));
        store.put_json("model/summary.json",
                       {{"best_epoch", trained.best_epoch},
                        {"best_valid_loss", trained.best_valid_loss},
                        {"epochs_run", trained.history.size()},
                        {"train_error", dnn::evaluate(trained.model, data, dnn::Split::Train)},
                        {"valid_error", dnn::evaluate(trained.model, data, dnn::Split::Valid)},
                        {"test_error", dnn::evaluate(trained.model, data, dnn::Split::Test)}});
      }
      for (const auto &name : store.names())
        if (name.rfind(stage == "train" ? "model/" : stage + "/", 0) == 0)
          written.push_back(name);
      store.record_stage(stage, hash, written);
    }
    catch (const StageError &)
    {
      throw;
    }
    catch (const std::exception &e)
    {
      throw StageError(stage, e.what());
    }
    outcome.seconds = seconds_since(start);
    result.stages.push_back(outcome);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Online phase and benchmark

namespace
{

void check_params(const problems::ParamBox &box, const Eigen::MatrixXd &params, bool reject)
{
  if (params.rows() > 0 && params.cols() != box.dim())
    throw DimensionError("parameter batch has " + std::to_string(params.cols()) +
                         " columns, expected " + std::to_string(box.dim()));
  for (Index i = 0; i < params.rows(); ++i)
  {
    const ParamVec mu = params.row(i).transpose();
    if (box.contains(mu))
      continue;
    std::ostringstream ss;
    ss << "parameter row " << i << " (" << mu.transpose() << ") is outside the parameter box";
    if (reject)
      throw ConfigError(ss.str());
    log::warn(ss.str());
  }
}

} // namespace

OnlineResult online(const io::ArtifactStore &store, const Eigen::MatrixXd &params,
                    bool reject_outside)
{
  const RunConfig config = stored_config(store);
  const auto model = io::load_model(store, "model");
  const auto basis = io::load_basis(store, "pod");
  OnlineResult out;
  if (params.rows() == 0)
  {
    out.solutions.resize(0, basis.V.rows());
    out.coefficients.resize(0, basis.n_pod);
    return out;
  }
  check_params(config.box(), params, reject_outside);
  const auto start = Clock::now();
  out.coefficients = dnn::forward(model, params);
  out.solutions.noalias() = out.coefficients * basis.V.transpose();
  out.seconds = seconds_since(start);
  return out;
}

double mean_relative_error(const Eigen::MatrixXd &approx, const Eigen::MatrixXd &truth)
{
  if (approx.rows() != truth.rows() || approx.cols() != truth.cols())
    throw DimensionError("mean_relative_error: shape mismatch");
  if (truth.rows() == 0)
    return 0.0;
  double sum = 0.0;
  for (Index i = 0; i < truth.rows(); ++i)
    sum += (approx.row(i) - truth.row(i)).norm() / truth.row(i).norm();
  return sum / static_cast<double>(truth.rows());
}

void BenchmarkReport::write_csv(std::ostream &out) const
{
  out << "method,mean_relative_error,seconds,n_params\n";
  for (const auto &m : methods)
    out << m.method << ',' << pad_csv(m.mean_relative_error) << ',' << pad_csv(m.seconds) << ','
        << m.n_params << '\n';
}

BenchmarkReport benchmark(const io::ArtifactStore &store)
{
  const RunConfig config = stored_config(store);
  const auto data = io::load_dataset(store, "dataset");
  const auto model = io::load_model(store, "model");
  const auto basis = io::load_basis(store, "pod");
  const HighFidelityModel hf(io::load_nodes(store, "nodes"), config);
  const rom::AffineReducedOperator reduced(hf.rows, basis.V);

  const Eigen::MatrixXd params = data.split_inputs(dnn::Split::Test);
  const Index m = params.rows();
  const Index N = hf.nodes.size();

  Eigen::MatrixXd truth(m, N);
  auto start = Clock::now();
  for (Index i = 0; i < m; ++i)
    truth.row(i) = hf.solve(params.row(i).transpose()).transpose();
  const double t_fd = seconds_since(start);

  Eigen::MatrixXd ls(m, N);
  start = Clock::now();
  for (Index i = 0; i < m; ++i)
  {
    const ParamVec mu = params.row(i).transpose();
    const auto rs = reduced.assemble(mu, rbf::assemble_rhs(hf.nodes, hf.op, mu));
    ls.row(i) = rom::reduced_solution(basis.V, rom::solve_reduced_ls(rs)).transpose();
  }
  const double t_ls = seconds_since(start);

  start = Clock::now();
  const Eigen::MatrixXd coeffs = dnn::forward(model, params);
  Eigen::MatrixXd nn(m, N);
  nn.noalias() = coeffs * basis.V.transpose();
  const double t_nn = seconds_since(start);

  BenchmarkReport report;
  report.methods = {{"rbf_fd", 0.0, t_fd, m},
                    {"reduced_ls", mean_relative_error(ls, truth), t_ls, m},
                    {"pod_dnn", mean_relative_error(nn, truth), t_nn, m}};
  report.ordering_holds = t_nn < t_ls && t_ls < t_fd;
  return report;
}

// ---------------------------------------------------------------------------
// Hyperparameter grid

Index GridSpec::size() const
{
  return static_cast<Index>(layers.size() * widths.size() * epochs.size() * batches.size() *
                            lrs.size());
}

std::vector<GridRow> hyperparameter_grid(const io::ArtifactStore &store,
                                         const dnn::TrainConfig &base, const GridSpec &grid)
{
  if (grid.size() == 0)
    throw ConfigError("hyperparameter grid is empty");
  const RunConfig config = stored_config(store);
  const auto data = io::load_dataset(store, "dataset");
  std::vector<GridRow> rows;
  for (Index L : grid.layers)
    for (Index w : grid.widths)
      for (Index e : grid.epochs)
        for (Index b : grid.batches)
          for (double lr : grid.lrs)
          {
            GridRow row{L, w, e, b, lr, 0.0, 0.0, {}};
            dnn::TrainConfig cfg = base;
            cfg.hidden.assign(static_cast<std::size_t>(std::max<Index>(L, 0)), w);
            cfg.n_epochs = e;
            cfg.batch_size = b;
            cfg.lr = lr;
            const auto start = Clock::now();
            try
            {
              const auto result = dnn::train(data, cfg, config.box_lower, config.box_upper);
              row.train_seconds = seconds_since(start);
              row.test_error = dnn::evaluate(result.model, data, dnn::Split::Test);
            }
            catch (const std::exception &ex)
            {
              row.train_seconds = seconds_since(start);
              row.test_error = std::numeric_limits<double>::quiet_NaN();
              row.error = ex.what();
            }
            rows.push_back(row);
          }
  return rows;
}

void write_grid_csv(const std::vector<GridRow> &rows, std::ostream &out)
{
  out << "L,n_neurons,n_epochs,batch,lr,test_error,train_seconds,error\n";
  for (const auto &r : rows)
  {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << r.layers << ',' << r.width << ',' << r.epochs << ',' << r.batch << ',' << pad_csv(r.lr)
        << ',' << pad_csv(r.test_error) << ',' << pad_csv(r.train_seconds) << ',' << err << '\n';
  }
}

// ---------------------------------------------------------------------------
// Network calculus verification

namespace
{

double spectral_norm(const Eigen::MatrixXd &A)
{
  if (A.size() == 0)
    return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
}

// Gaussian direction scaled to spectral norm z (even draws) or z u, u ~ U(0, 1).
Eigen::MatrixXd admissible_matrix(Index rows, Index cols, double z, int draw, std::mt19937_64 &rng)
{
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(rows, cols);
  for (Index k = 0; k < A.size(); ++k)
    A(k) = g(rng);
  const double radius = draw % 2 == 0 ? z : z * unit_draw(rng);
  return A * (radius / spectral_norm(A));
}

VerifyRow size_fields(VerifyRow row, const netcalc::ReluNetwork &net)
{
  const auto report = netcalc::size_report(net);
  row.L = report.L;
  row.M = report.M;
  return row;
}

} // namespace

std::vector<VerifyRow> netcalc_verify(const VerifySpec &spec)
{
  using namespace netcalc;
  std::mt19937_64 rng(spec.seed);
  std::vector<VerifyRow> rows;

  for (Index n : {1, 3})
    for (Index j : {1, 2, 4})
    {
      const auto net = identity_net(n, j);
      double worst = 0.0;
      for (Index t = 0; t < spec.draws; ++t)
      {
        Eigen::VectorXd x(n);
        for (Index k = 0; k < n; ++k)
          x(k) = 4.0 * unit_draw(rng) - 2.0;
        worst = std::max(worst, (realize(net, x) - x).cwiseAbs().maxCoeff());
      }
      rows.push_back(size_fields({"identity", 0.0, 0.0, n, j, worst, worst == 0.0, 0, 0}, net));
    }

  const double Z = 1.0;
  for (double eps : {1e-1, 1e-2})
    for (Index n : {1, 2, 3})
    {
      const auto net = mult_net(Z, n, n, n, eps);
      double worst = 0.0;
      for (Index t = 0; t < spec.draws; ++t)
      {
        const auto A = admissible_matrix(n, n, Z, static_cast<int>(t), rng);
        const auto B = admissible_matrix(n, n, Z, static_cast<int>(t), rng);
        Eigen::VectorXd x(2 * n * n);
        x << vec(A), vec(B);
        worst = std::max(worst, spectral_norm(A * B - matr(realize(net, x), n, n)));
      }
      rows.push_back(size_fields({"mult", eps, 0.0, n, 0, worst, worst <= eps, 0, 0}, net));
    }

  for (Index i : {1, 2, 3})
    for (Index n : {1, 2, 3})
    {
      const double eps = 0.05;
      const double delta = 0.3;
      const auto net = power_net(i, eps, delta, n);
      double worst = 0.0;
      for (Index t = 0; t < spec.draws; ++t)
      {
        const auto A = admissible_matrix(n, n, 1.0 - delta, static_cast<int>(t), rng);
        Eigen::MatrixXd P = A;
        for (Index k = 0; k < i; ++k)
          P = P * P;
        worst = std::max(worst, spectral_norm(P - matr(realize(net, vec(A)), n, n)));
      }
      rows.push_back(size_fields({"power", eps, delta, n, i, worst, worst <= eps, 0, 0}, net));
    }

  for (double delta : {0.3, 0.5})
    for (Index n : {1, 2, 3, 4})
    {
      const InverseNetConfig cfg{0.1, delta};
      const auto net = inverse_net(cfg, n);
      double worst = 0.0;
      for (Index t = 0; t < spec.draws; ++t)
      {
        const auto A = admissible_matrix(n, n, 1.0 - delta, static_cast<int>(t), rng);
        const Eigen::MatrixXd exact = (Eigen::MatrixXd::Identity(n, n) - A).inverse();
        worst = std::max(worst, spectral_norm(exact - matr(realize(net, vec(A)), n, n)));
      }
      rows.push_back(size_fields(
        {"inverse", cfg.epsilon, delta, n, cfg.stages(), worst, worst <= cfg.epsilon, 0, 0}, net));
    }

  {
    double worst = 0.0;
    const Index n = 4;
    const Index l = 4;
    for (Index t = 0; t < spec.draws; ++t)
    {
      const auto A = admissible_matrix(n, n, 0.9, static_cast<int>(t), rng);
      const auto [sum, product] = neumann_product_check(A, l);
      worst = std::max(worst, (sum - product).cwiseAbs().maxCoeff());
    }
    rows.push_back({"neumann_product", 1e-12, 0.1, n, l, worst, worst <= 1e-12, 0, 0});
  }
  return rows;
}

void write_verify_csv(const std::vector<VerifyRow> &rows, std::ostream &out)
{
  out << "construct,eps,delta,n,order,measured_error,bound_ok,L,M\n";
  for (const auto &r : rows)
    out << r.construct << ',' << pad_csv(r.eps) << ',' << pad_csv(r.delta) << ',' << r.n << ','
        << r.order << ',' << pad_csv(r.measured_error) << ',' << (r.bound_ok ? 1 : 0) << ','
        << r.L << ',' << r.M << '\n';
}

// ---------------------------------------------------------------------------
// Singular value decay

std::vector<pod::DecayScenario> decay_scenarios(const RunConfig &config,
                                                const std::vector<Index> &grid_sizes)
{
  const HighFidelityModel hf(make_nodes(config), config);
  std::vector<pod::DecayScenario> out;
  for (Index k : grid_sizes)
  {
    const auto params = grid_samples(config.box(), k);
    const Eigen::MatrixXd S = solve_many(hf, params, config.threads);
    out.push_back({static_cast<Index>(params.size()), pod::positive_singular_values(S)});
  }
  return out;
}

} // namespace podnn::pipeline
