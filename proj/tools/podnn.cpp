// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// podnn command line: offline stages, online inference and reports.
//
//   podnn [--config run.json] [--output DIR] [--set key=value ...] <command>
//
// Exit codes: 0 success, 1 stage failure, 2 invalid configuration.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "podnn/pipeline.hpp"

using namespace podnn;
using nlohmann::json;

namespace
{

struct Globals
{
  std::string config_path;
  std::string output_dir;
  std::vector<std::string> overrides;
  int threads = 0;
};

// key=value with dotted keys for nested objects; the value is parsed as JSON
// when possible and taken as a string otherwise.
void apply_override(json &j, const std::string &assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded())
    value = text;
  json *node = &j;
  std::size_t start = 0;
  for (auto dot = key.find('.'); dot != std::string::npos; dot = key.find('.', start))
  {
    node = &(*node)[key.substr(start, dot - start)];
    start = dot + 1;
  }
  (*node)[key.substr(start)] = value;
}

pipeline::RunConfig resolve_config(const Globals &g)
{
  json j = json::object();
  if (!g.config_path.empty())
  {
    std::ifstream in(g.config_path);
    if (!in)
      throw ConfigError("cannot open config " + g.config_path);
    j = json::parse(in, nullptr, false);
    if (j.is_discarded())
      throw ConfigError("config " + g.config_path + " is not valid JSON");
  }
  for (const auto &o : g.overrides)
    apply_override(j, o);
  auto config = pipeline::RunConfig::from_json(j);
  if (const char *env = std::getenv("PODNN_OUTPUT_DIR"); env && *env)
    config.output_dir = env;
  if (!g.output_dir.empty())
    config.output_dir = g.output_dir;
  if (g.threads > 0)
    config.threads = g.threads;
  config.validate();
  return config;
}

std::filesystem::path report_path(const pipeline::RunConfig &config, const std::string &name)
{
  std::filesystem::path dir = std::filesystem::path(config.output_dir) / "reports";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// Writes a report both to stdout and to reports/<name>.
template <typename Writer>
void emit_report(const pipeline::RunConfig &config, const std::string &name, Writer write)
{
  std::ostringstream ss;
  write(ss);
  std::cout << ss.str();
  const auto path = report_path(config, name);
  std::ofstream out(path);
  out << ss.str();
  if (!out)
    throw Error("cannot write " + path.string());
  std::cerr << "wrote " << path.string() << "\n";
}

int run_offline(const Globals &g, const std::string &last_stage)
{
  const auto config = resolve_config(g);
  io::ArtifactStore store(config.output_dir);
  const auto result = pipeline::offline(config, store, last_stage);
  for (const auto &s : result.stages)
  {
    std::cout << std::left << std::setw(10) << s.stage;
    if (s.skipped)
      std::cout << "up to date\n";
    else
      std::cout << "done in " << std::fixed << std::setprecision(2) << s.seconds << " s\n";
  }
  std::cout.unsetf(std::ios::floatfield);
  if (last_stage == "pod" || last_stage == "train")
  {
    const auto basis = io::load_basis(store, "pod");
    std::cout << "n_pod = " << basis.n_pod << " (eps_pod = " << basis.tolerance << ")\n";
  }
  if (last_stage == "train")
  {
    const auto summary = store.get_json("model/summary.json");
    std::cout << "best epoch " << summary["best_epoch"] << ", test error "
              << summary["test_error"].get<double>() << "\n";
  }
  return 0;
}

std::vector<double> parse_list(const std::string &text)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    std::size_t used = 0;
    double v = 0.0;
    try
    {
      v = std::stod(item, &used);
    }
    catch (const std::logic_error &)
    {
      used = std::string::npos;
    }
    if (used != item.size())
      throw ConfigError("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

Eigen::MatrixXd read_param_csv(const std::string &path, Index p)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open parameter file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line))
  {
    if (line.empty() || line[0] == '#')
      continue;
    if (rows.empty() && !(std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-' ||
                          line[0] == '.' || line[0] == '+'))
      continue; // header
    rows.push_back(parse_list(line));
    if (static_cast<Index>(rows.back().size()) != p)
      throw ConfigError(path + ": expected " + std::to_string(p) + " values per row");
  }
  Eigen::MatrixXd M(static_cast<Index>(rows.size()), p);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Index d = 0; d < p; ++d)
      M(static_cast<Index>(i), d) = rows[i][static_cast<std::size_t>(d)];
  return M;
}

std::vector<Index> to_indices(const std::vector<double> &v)
{
  std::vector<Index> out;
  for (double x : v)
    out.push_back(static_cast<Index>(x));
  return out;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"POD-DNN reduced-order modelling for parametric PDEs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("-c,--config", g.config_path, "run configuration (JSON)");
  app.add_option("-o,--output", g.output_dir,
                 "output directory (overrides PODNN_OUTPUT_DIR and the config)");
  app.add_option("-s,--set", g.overrides, "override a config key, e.g. --set train.lr=1e-3");
  app.add_option("-j,--threads", g.threads, "worker threads for snapshot and dataset solves");

  const std::vector<std::pair<std::string, std::string>> stages{
    {"nodes", "generate the collocation nodes"},
    {"snapshots", "solve the high-fidelity problem on the snapshot parameters"},
    {"pod", "compute the POD basis"},
    {"dataset", "build the labelled (mu, V^T u_mu) dataset"},
    {"train", "train the POD-DNN surrogate"},
    {"offline", "run every offline stage (same as train)"}};
  std::vector<CLI::App *> stage_cmds;
  for (const auto &[name, help] : stages)
    stage_cmds.push_back(app.add_subcommand(name, help));

  auto *infer = app.add_subcommand("infer", "evaluate the surrogate on a batch of parameters");
  std::string params_file, infer_out;
  std::vector<std::string> mus;
  bool warn_only = false;
  infer->add_option("--params", params_file, "CSV file with one parameter vector per row");
  infer->add_option("--mu", mus, "parameter vector as comma-separated values (repeatable)");
  infer->add_option("--out", infer_out, "CSV file for the m x N solutions");
  infer->add_flag("--warn-outside", warn_only, "only warn for parameters outside the box");

  auto *bench = app.add_subcommand("benchmark", "RBF-FD vs reduced LS vs POD-DNN on the test split");
  bool require_ordering = false;
  bench->add_flag("--require-ordering", require_ordering,
                  "exit 1 unless POD-DNN < reduced LS < RBF-FD in time");

  auto *grid = app.add_subcommand("grid", "hyperparameter grid search on the stored dataset");
  std::string g_layers = "2", g_widths = "500", g_epochs = "2000", g_batches = "100", g_lrs = "1e-4";
  grid->add_option("--layers", g_layers, "hidden layer counts");
  grid->add_option("--widths", g_widths, "neurons per hidden layer");
  grid->add_option("--epochs", g_epochs, "epoch counts");
  grid->add_option("--batches", g_batches, "batch sizes");
  grid->add_option("--lrs", g_lrs, "learning rates");

  auto *verify = app.add_subcommand("netcalc-verify", "Monte-Carlo check of the network constructions");
  pipeline::VerifySpec vspec;
  verify->add_option("--draws", vspec.draws, "draws per construct");
  verify->add_option("--seed", vspec.seed, "random seed");

  auto *decay = app.add_subcommand("decay", "singular value decay for grid snapshot sets");
  std::string decay_grid = "5,10";
  decay->add_option("--grid", decay_grid, "points per parameter axis, one scenario each");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try
  {
    for (std::size_t i = 0; i < stages.size(); ++i)
      if (stage_cmds[i]->parsed())
        return run_offline(g, stages[i].first == "offline" ? "train" : stages[i].first);

    if (infer->parsed())
    {
      const auto config = resolve_config(g);
      io::ArtifactStore store(config.output_dir);
      const Index p = config.box().dim();
      Eigen::MatrixXd batch(0, p);
      if (!params_file.empty())
        batch = read_param_csv(params_file, p);
      for (const auto &m : mus)
      {
        auto v = parse_list(m);
        if (static_cast<Index>(v.size()) != p)
          throw ConfigError("--mu needs " + std::to_string(p) + " values");
        batch.conservativeResize(batch.rows() + 1, Eigen::NoChange);
        batch.row(batch.rows() - 1) = Eigen::Map<Eigen::RowVectorXd>(v.data(), p);
      }
      const auto result = pipeline::online(store, batch, config.reject_outside && !warn_only);
      std::cerr << "inferred " << batch.rows() << " parameters in " << result.seconds << " s\n";
      std::ostringstream ss;
      ss << std::setprecision(17);
      for (Index i = 0; i < result.solutions.rows(); ++i)
      {
        for (Index k = 0; k < result.solutions.cols(); ++k)
          ss << (k ? "," : "") << result.solutions(i, k);
        ss << '\n';
      }
      if (infer_out.empty())
        std::cout << ss.str();
      else
      {
        std::ofstream out(infer_out);
        out << ss.str();
        if (!out)
          throw Error("cannot write " + infer_out);
      }
      return 0;
    }

    if (bench->parsed())
    {
      const auto config = resolve_config(g);
      io::ArtifactStore store(config.output_dir);
      const auto report = pipeline::benchmark(store);
      emit_report(config, "benchmark.csv", [&](std::ostream &o) { report.write_csv(o); });
      std::cout << "ordering pod_dnn < reduced_ls < rbf_fd: "
                << (report.ordering_holds ? "holds" : "violated") << "\n";
      return require_ordering && !report.ordering_holds ? 1 : 0;
    }

    if (grid->parsed())
    {
      const auto config = resolve_config(g);
      io::ArtifactStore store(config.output_dir);
      pipeline::GridSpec spec{to_indices(parse_list(g_layers)), to_indices(parse_list(g_widths)),
                              to_indices(parse_list(g_epochs)), to_indices(parse_list(g_batches)),
                              parse_list(g_lrs)};
      const auto rows = pipeline::hyperparameter_grid(store, config.train, spec);
      emit_report(config, "grid.csv", [&](std::ostream &o) { pipeline::write_grid_csv(rows, o); });
      return 0;
    }

    if (verify->parsed())
    {
      const auto config = resolve_config(g);
      const auto rows = pipeline::netcalc_verify(vspec);
      emit_report(config, "netcalc_verify.csv",
                  [&](std::ostream &o) { pipeline::write_verify_csv(rows, o); });
      for (const auto &r : rows)
        if (!r.bound_ok)
          return 1;
      return 0;
    }

    if (decay->parsed())
    {
      const auto config = resolve_config(g);
      const auto scenarios = pipeline::decay_scenarios(config, to_indices(parse_list(decay_grid)));
      emit_report(config, "decay.csv",
                  [&](std::ostream &o) { pod::singular_decay_report(scenarios, o); });
      return 0;
    }
  }
  catch (const ConfigError &e)
  {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
