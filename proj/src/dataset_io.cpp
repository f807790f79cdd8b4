// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "mobgen/dataset_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "le_io.hpp"

namespace mobgen {
namespace fs = std::filesystem;

std::size_t ArrayBlock::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

ArrayBlock ArrayBlock::FromMatrix(const Eigen::MatrixXf& m) {
  ArrayBlock b;
  b.dims = {static_cast<std::uint32_t>(m.rows()),
            static_cast<std::uint32_t>(m.cols())};
  b.data.reserve(m.size());
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) b.data.push_back(m(r, c));
  }
  return b;
}

ArrayBlock ArrayBlock::FromMatrix(const Eigen::MatrixXd& m) {
  return FromMatrix(Eigen::MatrixXf(m.cast<float>()));
}

ArrayBlock ArrayBlock::FromVector(const Eigen::VectorXd& v) {
  ArrayBlock b;
  b.dims = {static_cast<std::uint32_t>(v.size())};
  for (int i = 0; i < v.size(); ++i) b.data.push_back(static_cast<float>(v[i]));
  return b;
}

Eigen::MatrixXf ArrayBlock::to_matrix() const {
  if (dims.size() == 1) {
    Eigen::MatrixXf m(dims[0], 1);
    for (std::uint32_t i = 0; i < dims[0]; ++i) m(i, 0) = data[i];
    return m;
  }
  if (dims.size() != 2) throw FormatError("array: expected rank 1 or 2");
  Eigen::MatrixXf m(dims[0], dims[1]);
  std::size_t k = 0;
  for (std::uint32_t r = 0; r < dims[0]; ++r) {
    for (std::uint32_t c = 0; c < dims[1]; ++c) m(r, c) = data[k++];
  }
  return m;
}

void write_array(std::ostream& out, const ArrayBlock& block) {
  if (block.data.size() != block.element_count()) {
    throw PayloadMismatch("array: data size does not match dims");
  }
  out.write("MBRT", 4);
  le::put_u32(out, kArrayVersion);
  le::put_u32(out, static_cast<std::uint32_t>(block.dims.size()));
  for (auto d : block.dims) le::put_u32(out, d);
  for (float f : block.data) le::put_f32(out, f);
}

ArrayBlock read_array(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "MBRT") {
    throw BadMagic("array: bad magic");
  }
  std::uint32_t version, rank;
  if (!le::get_u32(in, &version)) throw PayloadMismatch("array: truncated");
  if (version != kArrayVersion) {
    throw VersionMismatch("array: unsupported version " +
                          std::to_string(version));
  }
  if (!le::get_u32(in, &rank)) throw PayloadMismatch("array: truncated");
  if (rank > 8) throw PayloadMismatch("array: implausible rank");
  ArrayBlock b;
  b.dims.resize(rank);
  for (auto& d : b.dims) {
    if (!le::get_u32(in, &d)) throw PayloadMismatch("array: truncated dims");
  }
  const std::size_t n = b.element_count();
  b.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!le::get_f32(in, &b.data[i])) {
      throw PayloadMismatch("array: payload holds " + std::to_string(i) +
                            " of " + std::to_string(n) + " values");
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw PayloadMismatch("array: trailing bytes after payload");
  }
  return b;
}

void write_array(const fs::path& path, const ArrayBlock& block) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_array(out, block);
}

ArrayBlock read_array(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_array(in);
}

void Demonstration::validate() const {
  if (observations.rows() == 0) throw FormatError("demo: no steps");
  if (actions.rows() != observations.rows()) {
    throw FormatError("demo: observation/action step counts differ");
  }
  if (object_poses.rows() != static_cast<int>(object_names.size()) ||
      (object_poses.rows() > 0 && object_poses.cols() != 7)) {
    throw FormatError("demo: object pose table must be objects x 7");
  }
  for (const auto& [k, v] : metadata) {
    if (k.find_first_of(":\n") != std::string::npos ||
        v.find('\n') != std::string::npos) {
      throw FormatError("demo: metadata must be single-line, key without ':'");
    }
  }
}

bool Demonstration::operator==(const Demonstration& o) const {
  auto same = [](const Eigen::MatrixXf& a, const Eigen::MatrixXf& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.size() == 0 || a == b);
  };
  return task_id == o.task_id && seed == o.seed && episode == o.episode &&
         success == o.success && same(observations, o.observations) &&
         same(actions, o.actions) && object_names == o.object_names &&
         same(object_poses, o.object_poses) && metadata == o.metadata;
}

namespace {

std::string shape(const Eigen::MatrixXf& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

Eigen::MatrixXf load_matrix(const fs::path& dir, const std::string& entry,
                            const std::string& key) {
  // entry: "<file> <rows>x<cols>"
  const auto parts = split(entry, ' ');
  if (parts.size() != 2) throw ManifestError("manifest: bad entry for " + key);
  const auto rc = split(parts[1], 'x');
  if (rc.size() != 2) throw ManifestError("manifest: bad shape for " + key);
  const long rows = std::stol(rc[0]), cols = std::stol(rc[1]);
  if (rows == 0) return Eigen::MatrixXf(0, cols);
  const ArrayBlock b = read_array(dir / parts[0]);
  if (b.dims.size() != 2 || b.dims[0] != rows || b.dims[1] != cols) {
    throw PayloadMismatch("manifest shape for " + key +
                          " disagrees with the array header");
  }
  return b.to_matrix();
}

}  // namespace

std::string episode_dir_name(std::uint64_t episode) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "episode_%06llu",
                static_cast<unsigned long long>(episode));
  return buf;
}

fs::path write_demo(const Demonstration& demo, const fs::path& directory) {
  demo.validate();
  fs::create_directories(directory);
  write_array(directory / "observations.mbrt",
              ArrayBlock::FromMatrix(demo.observations));
  write_array(directory / "actions.mbrt", ArrayBlock::FromMatrix(demo.actions));
  if (demo.object_poses.rows() > 0) {
    write_array(directory / "object_poses.mbrt",
                ArrayBlock::FromMatrix(demo.object_poses));
  }
  const fs::path manifest = directory / "manifest.txt";
  std::ofstream out(manifest, std::ios::binary);
  out << "format: mobgen-demo\n"
      << "version: " << kDemoVersion << "\n"
      << "task: " << demo.task_id << "\n"
      << "seed: " << demo.seed << "\n"
      << "episode: " << demo.episode << "\n"
      << "success: " << (demo.success ? "true" : "false") << "\n"
      << "steps: " << demo.steps() << "\n"
      << "observations: observations.mbrt " << shape(demo.observations) << "\n"
      << "actions: actions.mbrt " << shape(demo.actions) << "\n"
      << "object_poses: object_poses.mbrt " << shape(demo.object_poses) << "\n"
      << "object_names: " << join(demo.object_names) << "\n";
  for (const auto& [k, v] : demo.metadata) out << "meta." << k << ": " << v << "\n";
  if (!out) throw IoError("cannot write " + manifest.string());
  return manifest;
}

Demonstration read_demo(const fs::path& path) {
  const fs::path manifest =
      fs::is_directory(path) ? path / "manifest.txt" : path;
  const fs::path dir = manifest.parent_path();
  std::ifstream in(manifest);
  if (!in) throw ManifestError("cannot open " + manifest.string());
  std::map<std::string, std::string> kv;
  Demonstration demo;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto colon = line.find(": ");
    if (colon == std::string::npos) {
      throw ManifestError("manifest: malformed line '" + line + "'");
    }
    const std::string key = line.substr(0, colon);
    const std::string value = line.substr(colon + 2);
    if (key.rfind("meta.", 0) == 0) {
      demo.metadata[key.substr(5)] = value;
    } else {
      kv[key] = value;
    }
  }
  auto need = [&](const std::string& k) -> const std::string& {
    const auto it = kv.find(k);
    if (it == kv.end()) throw ManifestError("manifest: missing '" + k + "'");
    return it->second;
  };
  if (need("format") != "mobgen-demo") throw BadMagic("manifest: not a demo");
  if (need("version") != std::to_string(kDemoVersion)) {
    throw VersionMismatch("manifest: unsupported demo version " +
                          need("version"));
  }
  try {
    demo.task_id = need("task");
    demo.seed = std::stoull(need("seed"));
    demo.episode = std::stoull(need("episode"));
    demo.success = need("success") == "true";
    demo.observations = load_matrix(dir, need("observations"), "observations");
    demo.actions = load_matrix(dir, need("actions"), "actions");
    demo.object_poses = load_matrix(dir, need("object_poses"), "object_poses");
    demo.object_names = split(kv.count("object_names") ? kv["object_names"] : "", ',');
    if (std::stol(need("steps")) != demo.observations.rows()) {
      throw PayloadMismatch("manifest: step count disagrees with arrays");
    }
  } catch (const std::invalid_argument&) {
    throw ManifestError("manifest: non-numeric field in " + manifest.string());
  } catch (const std::out_of_range&) {
    throw ManifestError("manifest: numeric field out of range");
  }
  demo.validate();
  return demo;
}

std::vector<Demonstration> read_dataset(const fs::path& root) {
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "manifest.txt")) {
      dirs.push_back(e.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<Demonstration> out;
  for (const auto& d : dirs) out.push_back(read_demo(d));
  return out;
}

DatasetSummary filter_and_assemble(
    std::vector<Demonstration> raw,
    const std::function<bool(const Demonstration&)>& predicate) {
  DatasetSummary s;
  for (auto& d : raw) {
    auto& tally = s.per_task[d.task_id];
    if (d.success && (!predicate || predicate(d))) {
      ++tally.first;
      s.kept.push_back(std::move(d));
    } else {
      ++tally.second;
      ++s.dropped;
    }
  }
  return s;
}

}  // namespace mobgen
