// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "podnn/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace podnn::io
{

namespace fs = std::filesystem;

namespace
{

constexpr char kMagic[4] = {'P', 'D', 'N', 'N'};
constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 4;

static_assert(std::numeric_limits<double>::is_iec559, "container requires IEEE doubles");

template <typename T>
void put_le(std::string &out, T value)
{
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

template <typename U>
U get_le(std::string_view in, std::size_t offset)
{
  U u = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    u |= static_cast<U>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return u;
}

std::string read_file(const fs::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write to a sibling temporary and rename, so a crash never leaves a torn file.
void write_file_atomic(const fs::path &path, const std::string &bytes)
{
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out)
      throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

Eigen::MatrixXd index_column(const std::vector<Index> &idx)
{
  Eigen::MatrixXd m(static_cast<Index>(idx.size()), 1);
  for (std::size_t i = 0; i < idx.size(); ++i)
    m(static_cast<Index>(i), 0) = static_cast<double>(idx[i]);
  return m;
}

std::vector<Index> index_vector(const Eigen::MatrixXd &m, const std::string &what)
{
  if (m.size() > 0 && m.cols() != 1)
    throw DimensionError(what + ": index block must have one column");
  std::vector<Index> idx(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    double v = m(i, 0);
    if (!(v >= 0.0) || v != std::floor(v))
      throw Error(what + ": invalid index entry");
    idx[static_cast<std::size_t>(i)] = static_cast<Index>(v);
  }
  return idx;
}

std::string join(const std::string &prefix, const std::string &name)
{
  return prefix.empty() ? name : prefix + "/" + name;
}

json vector_json(const Eigen::VectorXd &v)
{
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json &j)
{
  auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Index>(values.size()));
}

} // namespace

std::string encode_matrix(const Eigen::MatrixXd &M)
{
  if (M.rows() > 0xffffffffLL || M.cols() > 0xffffffffLL)
    throw DimensionError("encode_matrix: dimensions exceed u32");
  std::string out;
  out.reserve(kHeaderBytes + 8 * static_cast<std::size_t>(M.size()));
  out.append(kMagic, 4);
  put_le<std::uint16_t>(out, kContainerVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(M.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(M.cols()));
  // Eigen's default storage is column-major already.
  for (Index k = 0; k < M.size(); ++k)
    put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(M.data()[k]));
  return out;
}

Eigen::MatrixXd decode_matrix(std::string_view bytes, const std::string &what)
{
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(what + ": not a PDNN container");
  auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kContainerVersion)
    throw Error(what + ": unsupported container version " + std::to_string(version));
  auto rows = get_le<std::uint32_t>(bytes, 6);
  auto cols = get_le<std::uint32_t>(bytes, 10);
  std::size_t count = static_cast<std::size_t>(rows) * cols;
  if (bytes.size() != kHeaderBytes + 8 * count)
    throw Error(what + ": payload is " + std::to_string(bytes.size() - kHeaderBytes) +
                " bytes, header declares " + std::to_string(rows) + "x" + std::to_string(cols));
  Eigen::MatrixXd M(rows, cols);
  for (std::size_t k = 0; k < count; ++k)
    M.data()[k] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, kHeaderBytes + 8 * k));
  return M;
}

void write_matrix(const fs::path &path, const Eigen::MatrixXd &M)
{
  write_file_atomic(path, encode_matrix(M));
}

Eigen::MatrixXd read_matrix(const fs::path &path)
{
  return decode_matrix(read_file(path), path.string());
}

std::string sha256_hex(std::string_view bytes)
{
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  std::ostringstream ss;
  ss << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i)
    ss << std::setw(2) << static_cast<int>(md[i]);
  return ss.str();
}

// ---------------------------------------------------------------------------
// ArtifactStore

ArtifactStore::ArtifactStore(fs::path root)
  : root_(std::move(root))
{
  fs::create_directories(root_);
  fs::path mpath = root_ / "manifest.json";
  if (fs::exists(mpath)) {
    try {
      manifest_ = json::parse(read_file(mpath));
    } catch (const json::exception &e) {
      throw Error("corrupt manifest " + mpath.string() + ": " + e.what());
    }
  } else {
    manifest_ = json::object();
  }
  if (!manifest_.contains("artifacts"))
    manifest_["artifacts"] = json::object();
  if (!manifest_.contains("stages"))
    manifest_["stages"] = json::object();
}

void ArtifactStore::save_manifest() const
{
  write_file_atomic(root_ / "manifest.json", manifest_.dump(2) + "\n");
}

void ArtifactStore::put_bytes(const std::string &name, const std::string &bytes)
{
  if (name.empty() || name.front() == '/' || name.find("..") != std::string::npos)
    throw ConfigError("artifact name must be a relative path: '" + name + "'");
  write_file_atomic(root_ / name, bytes);
  manifest_["artifacts"][name] = {{"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}};
  save_manifest();
}

std::string ArtifactStore::get_bytes(const std::string &name) const
{
  if (!has(name))
    throw Error("artifact '" + name + "' not in manifest of " + root_.string());
  std::string bytes = read_file(root_ / name);
  const auto &entry = manifest_["artifacts"][name];
  if (sha256_hex(bytes) != entry["sha256"].get<std::string>())
    throw Error("artifact '" + name + "' does not match its manifest hash");
  return bytes;
}

void ArtifactStore::put_matrix(const std::string &name, const Eigen::MatrixXd &M)
{
  put_bytes(name, encode_matrix(M));
}

Eigen::MatrixXd ArtifactStore::get_matrix(const std::string &name) const
{
  return decode_matrix(get_bytes(name), name);
}

void ArtifactStore::put_json(const std::string &name, const json &value)
{
  put_bytes(name, value.dump(2) + "\n");
}

json ArtifactStore::get_json(const std::string &name) const
{
  return json::parse(get_bytes(name));
}

void ArtifactStore::put_text(const std::string &name, const std::string &text)
{
  put_bytes(name, text);
}

std::string ArtifactStore::get_text(const std::string &name) const
{
  return get_bytes(name);
}

bool ArtifactStore::has(const std::string &name) const
{
  return manifest_["artifacts"].contains(name);
}

std::string ArtifactStore::hash(const std::string &name) const
{
  if (!has(name))
    throw Error("artifact '" + name + "' not in manifest");
  return manifest_["artifacts"][name]["sha256"].get<std::string>();
}

std::vector<std::string> ArtifactStore::names() const
{
  std::vector<std::string> out;
  for (const auto &[key, value] : manifest_["artifacts"].items())
    out.push_back(key);
  return out;
}

bool ArtifactStore::stage_complete(const std::string &stage, const std::string &config_hash) const
{
  const auto &stages = manifest_["stages"];
  if (!stages.contains(stage))
    return false;
  const auto &entry = stages[stage];
  if (entry["config_hash"].get<std::string>() != config_hash)
    return false;
  for (const auto &name : entry["artifacts"]) {
    auto n = name.get<std::string>();
    if (!has(n) || !fs::exists(root_ / n))
      return false;
    if (sha256_hex(read_file(root_ / n)) != hash(n))
      return false;
  }
  return true;
}

void ArtifactStore::record_stage(const std::string &stage, const std::string &config_hash,
                                 const std::vector<std::string> &artifacts)
{
  for (const auto &n : artifacts)
    if (!has(n))
      throw Error("stage '" + stage + "' lists unknown artifact '" + n + "'");
  manifest_["stages"][stage] = {{"config_hash", config_hash}, {"artifacts", artifacts}};
  save_manifest();
}

std::string ArtifactStore::stage_hash(const std::string &stage) const
{
  const auto &stages = manifest_["stages"];
  if (!stages.contains(stage))
    return {};
  return stages[stage]["config_hash"].get<std::string>();
}

// ---------------------------------------------------------------------------
// Domain objects

void save_nodes(ArtifactStore &store, const std::string &prefix, const geometry::NodeSet &nodes)
{
  // Row-major N_I x 2 and N_B x 2 blocks: one node per row.
  store.put_matrix(join(prefix, "interior.pdnn"), nodes.interior().transpose());
  store.put_matrix(join(prefix, "boundary.pdnn"), nodes.boundary().transpose());
  store.put_json(join(prefix, "nodes.json"), {{"N", nodes.size()},
                                               {"N_I", nodes.n_interior()},
                                               {"seed", nodes.seed},
                                               {"domain", nodes.description}});
}

geometry::NodeSet load_nodes(const ArtifactStore &store, const std::string &prefix)
{
  json meta = store.get_json(join(prefix, "nodes.json"));
  Eigen::MatrixXd interior = store.get_matrix(join(prefix, "interior.pdnn"));
  Eigen::MatrixXd boundary = store.get_matrix(join(prefix, "boundary.pdnn"));
  if ((interior.size() > 0 && interior.cols() != 2) || (boundary.size() > 0 && boundary.cols() != 2))
    throw DimensionError("load_nodes: coordinate blocks must have two columns");
  if (interior.rows() != meta["N_I"].get<Index>() ||
      interior.rows() + boundary.rows() != meta["N"].get<Index>())
    throw Error("load_nodes: block sizes disagree with metadata");
  Eigen::Matrix2Xd in = interior.transpose();
  Eigen::Matrix2Xd bd = boundary.transpose();
  geometry::NodeSet nodes(std::move(in), std::move(bd));
  nodes.seed = meta["seed"].get<std::uint64_t>();
  nodes.description = meta["domain"].get<std::string>();
  return nodes;
}

void save_basis(ArtifactStore &store, const std::string &prefix, const pod::PodBasis &basis)
{
  store.put_matrix(join(prefix, "V.pdnn"), basis.V);
  store.put_matrix(join(prefix, "sigma.pdnn"), basis.singular_values);
  store.put_json(join(prefix, "basis.json"), {{"n_pod", basis.n_pod},
                                               {"eps_pod", basis.tolerance},
                                               {"rank", basis.rank()},
                                               {"singular_values", vector_json(basis.singular_values)}});
}

pod::PodBasis load_basis(const ArtifactStore &store, const std::string &prefix)
{
  json meta = store.get_json(join(prefix, "basis.json"));
  pod::PodBasis basis;
  basis.V = store.get_matrix(join(prefix, "V.pdnn"));
  Eigen::MatrixXd sigma = store.get_matrix(join(prefix, "sigma.pdnn"));
  basis.singular_values = sigma.reshaped();
  basis.n_pod = meta["n_pod"].get<Index>();
  basis.tolerance = meta["eps_pod"].get<double>();
  if (basis.V.cols() != basis.n_pod || basis.n_pod > basis.rank())
    throw Error("load_basis: n_pod disagrees with stored basis");
  for (Index i = 0; i < basis.rank(); ++i)
    if (!(basis.singular_values(i) > 0.0) ||
        (i > 0 && basis.singular_values(i) > basis.singular_values(i - 1)))
      throw Error("load_basis: singular values must be positive and non-increasing");
  Eigen::MatrixXd gram = basis.V.transpose() * basis.V;
  if ((gram - Eigen::MatrixXd::Identity(basis.n_pod, basis.n_pod)).cwiseAbs().maxCoeff() > 1e-10)
    throw Error("load_basis: V is not orthonormal");
  return basis;
}

void save_snapshots(ArtifactStore &store, const std::string &prefix,
                    const pod::SnapshotMatrix &snapshots)
{
  snapshots.validate();
  Index p = snapshots.params.empty() ? 0 : snapshots.params.front().size();
  Eigen::MatrixXd params(static_cast<Index>(snapshots.params.size()), p);
  for (std::size_t j = 0; j < snapshots.params.size(); ++j)
    params.row(static_cast<Index>(j)) = snapshots.params[j].transpose();
  store.put_matrix(join(prefix, "S.pdnn"), snapshots.S);
  store.put_matrix(join(prefix, "params.pdnn"), params);
}

pod::SnapshotMatrix load_snapshots(const ArtifactStore &store, const std::string &prefix)
{
  pod::SnapshotMatrix out;
  out.S = store.get_matrix(join(prefix, "S.pdnn"));
  Eigen::MatrixXd params = store.get_matrix(join(prefix, "params.pdnn"));
  for (Index j = 0; j < params.rows(); ++j)
    out.params.push_back(params.row(j).transpose());
  out.validate();
  return out;
}

void save_dataset(ArtifactStore &store, const std::string &prefix, const dnn::Dataset &data)
{
  data.validate();
  store.put_matrix(join(prefix, "inputs.pdnn"), data.inputs);
  store.put_matrix(join(prefix, "targets.pdnn"), data.targets);
  store.put_matrix(join(prefix, "train.pdnn"), index_column(data.train));
  store.put_matrix(join(prefix, "valid.pdnn"), index_column(data.valid));
  store.put_matrix(join(prefix, "test.pdnn"), index_column(data.test));
}

dnn::Dataset load_dataset(const ArtifactStore &store, const std::string &prefix)
{
  dnn::Dataset data;
  data.inputs = store.get_matrix(join(prefix, "inputs.pdnn"));
  data.targets = store.get_matrix(join(prefix, "targets.pdnn"));
  data.train = index_vector(store.get_matrix(join(prefix, "train.pdnn")), "train split");
  data.valid = index_vector(store.get_matrix(join(prefix, "valid.pdnn")), "valid split");
  data.test = index_vector(store.get_matrix(join(prefix, "test.pdnn")), "test split");
  data.validate();
  return data;
}

json train_config_json(const dnn::TrainConfig &c)
{
  return {{"hidden", c.hidden},   {"lr", c.lr},
          {"beta1", c.beta1},     {"beta2", c.beta2},
          {"eps_adam", c.eps_adam}, {"batch_size", c.batch_size},
          {"n_epochs", c.n_epochs}, {"patience", c.patience},
          {"seed", c.seed}};
}

dnn::TrainConfig train_config_from_json(const json &j)
{
  dnn::TrainConfig c;
  if (!j.is_object())
    throw ConfigError("train config must be a JSON object");
  for (const auto &[key, value] : j.items()) {
    if (key == "hidden")
      c.hidden = value.get<std::vector<Index>>();
    else if (key == "lr")
      c.lr = value.get<double>();
    else if (key == "beta1")
      c.beta1 = value.get<double>();
    else if (key == "beta2")
      c.beta2 = value.get<double>();
    else if (key == "eps_adam")
      c.eps_adam = value.get<double>();
    else if (key == "batch_size")
      c.batch_size = value.get<Index>();
    else if (key == "n_epochs")
      c.n_epochs = value.get<Index>();
    else if (key == "patience")
      c.patience = value.get<Index>();
    else if (key == "seed")
      c.seed = value.get<std::uint64_t>();
    else
      throw ConfigError("unknown train config key '" + key + "'");
  }
  return c;
}

void save_model(ArtifactStore &store, const std::string &prefix, const dnn::MlpModel &model,
                const dnn::TrainConfig &config)
{
  model.validate();
  for (Index i = 0; i < model.n_layers(); ++i) {
    auto k = static_cast<std::size_t>(i);
    store.put_matrix(join(prefix, "W" + std::to_string(i) + ".pdnn"), model.weights[k]);
    store.put_matrix(join(prefix, "b" + std::to_string(i) + ".pdnn"), model.biases[k]);
  }
  json normalization = nullptr;
  if (model.normalizes())
    normalization = {{"lower", vector_json(model.input_lower)},
                     {"upper", vector_json(model.input_upper)}};
  store.put_json(join(prefix, "model.json"), {{"widths", model.widths},
                                               {"normalization", normalization},
                                               {"config", train_config_json(config)},
                                               {"seed", config.seed}});
}

dnn::MlpModel load_model(const ArtifactStore &store, const std::string &prefix)
{
  json meta = store.get_json(join(prefix, "model.json"));
  dnn::MlpModel model;
  model.widths = meta["widths"].get<std::vector<Index>>();
  if (model.widths.size() < 2)
    throw Error("load_model: need at least two widths");
  for (std::size_t i = 0; i + 1 < model.widths.size(); ++i) {
    model.weights.push_back(store.get_matrix(join(prefix, "W" + std::to_string(i) + ".pdnn")));
    Eigen::MatrixXd b = store.get_matrix(join(prefix, "b" + std::to_string(i) + ".pdnn"));
    model.biases.push_back(b.reshaped());
  }
  if (!meta["normalization"].is_null()) {
    model.input_lower = vector_from_json(meta["normalization"]["lower"]);
    model.input_upper = vector_from_json(meta["normalization"]["upper"]);
  }
  model.validate();
  return model;
}

void save_network(ArtifactStore &store, const std::string &prefix, const netcalc::ReluNetwork &net)
{
  auto W = net.dense_weights();
  auto b = net.biases();
  std::vector<Index> widths{net.input_dim()};
  for (std::size_t i = 0; i < W.size(); ++i) {
    store.put_matrix(join(prefix, "W" + std::to_string(i) + ".pdnn"), W[i]);
    store.put_matrix(join(prefix, "b" + std::to_string(i) + ".pdnn"), b[i]);
    widths.push_back(W[i].rows());
  }
  store.put_json(join(prefix, "network.json"),
                 {{"depth", net.depth()}, {"nonzeros", net.nonzeros()}, {"widths", widths}});
}

netcalc::ReluNetwork load_network(const ArtifactStore &store, const std::string &prefix)
{
  json meta = store.get_json(join(prefix, "network.json"));
  auto depth = meta["depth"].get<Index>();
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;
  for (Index i = 0; i < depth; ++i) {
    W.push_back(store.get_matrix(join(prefix, "W" + std::to_string(i) + ".pdnn")));
    Eigen::MatrixXd bi = store.get_matrix(join(prefix, "b" + std::to_string(i) + ".pdnn"));
    b.push_back(bi.reshaped());
  }
  auto net = netcalc::ReluNetwork::from_dense(W, b);
  if (net.nonzeros() != meta["nonzeros"].get<Index>())
    throw Error("load_network: nonzero count disagrees with metadata");
  return net;
}

std::string history_csv(const std::vector<dnn::LossRecord> &history)
{
  std::ostringstream ss;
  ss << std::setprecision(17);
  ss << "epoch,train_loss,valid_loss\n";
  for (const auto &r : history)
    ss << r.epoch << ',' << r.train_loss << ',' << r.valid_loss << '\n';
  return ss.str();
}

} // namespace podnn::io
