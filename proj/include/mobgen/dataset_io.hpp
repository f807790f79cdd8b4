// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary array blocks and demonstration directories.
//
// ArrayBlock layout (all integers little-endian):
//   "MBRT" | version u32 | rank u32 | dims u32 x rank | float32 payload
// The payload is row-major and exactly product(dims) * 4 bytes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mobgen/errors.hpp"
#include "mobgen/format_errors.hpp"

namespace mobgen {

inline constexpr std::uint32_t kArrayVersion = 1;
inline constexpr int kDemoVersion = 1;

struct ArrayBlock {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const;
  bool operator==(const ArrayBlock&) const = default;

  /// Row-major rank-2 block.
  static ArrayBlock FromMatrix(const Eigen::MatrixXf& m);
  static ArrayBlock FromMatrix(const Eigen::MatrixXd& m);
  static ArrayBlock FromVector(const Eigen::VectorXd& v);
  Eigen::MatrixXf to_matrix() const;
};

void write_array(std::ostream& out, const ArrayBlock& block);
ArrayBlock read_array(std::istream& in);
void write_array(const std::filesystem::path& path, const ArrayBlock& block);
ArrayBlock read_array(const std::filesystem::path& path);

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>;

struct Demonstration {
  std::string task_id;
  std::uint64_t seed = 0;
  std::uint64_t episode = 0;
  bool success = false;
  Eigen::MatrixXf observations;  // steps x obs_dim
  Eigen::MatrixXf actions;       // steps x act_dim
  std::vector<std::string> object_names;
  Eigen::MatrixXf object_poses;  // objects x 7 (w, x, y, z, tx, ty, tz)
  std::map<std::string, std::string> metadata;

  int steps() const { return static_cast<int>(observations.rows()); }
  void validate() const;
  bool operator==(const Demonstration& o) const;
};

/// Writes manifest.txt plus array files into `directory` (created if
/// needed) and returns the manifest path.
std::filesystem::path write_demo(const Demonstration& demo,
                                 const std::filesystem::path& directory);
/// Accepts the manifest path or its directory.
Demonstration read_demo(const std::filesystem::path& path);

/// Loads every episode directory under `root`, in name order.
std::vector<Demonstration> read_dataset(const std::filesystem::path& root);

struct DatasetSummary {
  std::vector<Demonstration> kept;
  std::size_t dropped = 0;
  /// task id -> (kept, dropped)
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_task;
};

/// Keeps successful demonstrations that also satisfy `predicate` (when set).
DatasetSummary filter_and_assemble(
    std::vector<Demonstration> raw,
    const std::function<bool(const Demonstration&)>& predicate = {});

/// Name of the n-th episode directory inside a dataset.
std::string episode_dir_name(std::uint64_t episode);

}  // namespace mobgen
