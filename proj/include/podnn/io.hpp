// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PODNN_IO_HPP
#define PODNN_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "podnn/dnn.hpp"
#include "podnn/geometry.hpp"
#include "podnn/netcalc.hpp"
#include "podnn/pod.hpp"

namespace podnn::io
{

using json = nlohmann::json;

// Matrix container: "PDNN", u16 version, u32 rows, u32 cols, then rows * cols
// little-endian IEEE doubles in column-major order.
inline constexpr std::uint16_t kContainerVersion = 1;

std::string encode_matrix(const Eigen::MatrixXd &M);
// `what` names the source in error messages.
Eigen::MatrixXd decode_matrix(std::string_view bytes, const std::string &what = "matrix");

void write_matrix(const std::filesystem::path &path, const Eigen::MatrixXd &M);
Eigen::MatrixXd read_matrix(const std::filesystem::path &path);

std::string sha256_hex(std::string_view bytes);

// Directory of named artifacts with a JSON manifest recording the SHA-256 of
// every file and the configuration hash of every completed stage. Names are
// relative paths inside the root.
class ArtifactStore
{
public:
  explicit ArtifactStore(std::filesystem::path root);

  const std::filesystem::path &root() const { return root_; }

  void put_matrix(const std::string &name, const Eigen::MatrixXd &M);
  Eigen::MatrixXd get_matrix(const std::string &name) const;
  void put_json(const std::string &name, const json &value);
  json get_json(const std::string &name) const;
  void put_text(const std::string &name, const std::string &text);
  std::string get_text(const std::string &name) const;

  bool has(const std::string &name) const;
  std::string hash(const std::string &name) const;
  std::vector<std::string> names() const;

  // A stage is complete when it was recorded with the same configuration hash
  // and all of its artifacts still match their manifest hashes.
  bool stage_complete(const std::string &stage, const std::string &config_hash) const;
  void record_stage(const std::string &stage, const std::string &config_hash,
                    const std::vector<std::string> &artifacts);
  std::string stage_hash(const std::string &stage) const;

  const json &manifest() const { return manifest_; }

private:
  void put_bytes(const std::string &name, const std::string &bytes);
  std::string get_bytes(const std::string &name) const;
  void save_manifest() const;

  std::filesystem::path root_;
  json manifest_;
};

// Domain objects. Each writes under `prefix/` and revalidates on load.
void save_nodes(ArtifactStore &store, const std::string &prefix, const geometry::NodeSet &nodes);
geometry::NodeSet load_nodes(const ArtifactStore &store, const std::string &prefix);

void save_basis(ArtifactStore &store, const std::string &prefix, const pod::PodBasis &basis);
pod::PodBasis load_basis(const ArtifactStore &store, const std::string &prefix);

void save_snapshots(ArtifactStore &store, const std::string &prefix,
                    const pod::SnapshotMatrix &snapshots);
pod::SnapshotMatrix load_snapshots(const ArtifactStore &store, const std::string &prefix);

void save_dataset(ArtifactStore &store, const std::string &prefix, const dnn::Dataset &data);
dnn::Dataset load_dataset(const ArtifactStore &store, const std::string &prefix);

json train_config_json(const dnn::TrainConfig &config);
dnn::TrainConfig train_config_from_json(const json &j);

void save_model(ArtifactStore &store, const std::string &prefix, const dnn::MlpModel &model,
                const dnn::TrainConfig &config);
dnn::MlpModel load_model(const ArtifactStore &store, const std::string &prefix);

void save_network(ArtifactStore &store, const std::string &prefix,
                  const netcalc::ReluNetwork &net);
netcalc::ReluNetwork load_network(const ArtifactStore &store, const std::string &prefix);

std::string history_csv(const std::vector<dnn::LossRecord> &history);

} // namespace podnn::io

#endif // PODNN_IO_HPP
