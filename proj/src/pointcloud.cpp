// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "mobgen/pointcloud.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>

#include "le_io.hpp"
#include "mobgen/errors.hpp"
#include "mobgen/format_errors.hpp"
#include "mobgen/rng.hpp"

namespace mobgen {

DepthImage::DepthImage(int w, int h, Intrinsics k, double fill)
    : width(w), height(h),
      depth(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill),
      intrinsics(k) {}

bool DepthImage::valid(int u, int v) const {
  const double d = at(u, v);
  return std::isfinite(d) && d > 0.0;
}

void DepthImage::validate() const {
  if (width < 0 || height < 0 ||
      depth.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("depth image: size mismatch");
  }
  if (!(intrinsics.fx > 0 && intrinsics.fy > 0)) {
    throw std::invalid_argument("depth image: focal lengths must be positive");
  }
}

std::vector<bool> depth_edges(const DepthImage& img, double grad_thresh) {
  std::vector<bool> edge(img.depth.size(), false);
  static constexpr int kDu[4] = {1, -1, 0, 0};
  static constexpr int kDv[4] = {0, 0, 1, -1};
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      if (!img.valid(u, v)) continue;
      double jump = 0.0;
      for (int n = 0; n < 4; ++n) {
        const int uu = u + kDu[n], vv = v + kDv[n];
        if (uu < 0 || vv < 0 || uu >= img.width || vv >= img.height) continue;
        if (!img.valid(uu, vv)) continue;
        jump = std::max(jump, std::abs(img.at(uu, vv) - img.at(u, v)));
      }
      edge[static_cast<std::size_t>(v) * img.width + u] = jump > grad_thresh;
    }
  }
  return edge;
}

DepthImage inject_depth_noise(const DepthImage& img,
                              const DepthNoiseParams& params,
                              std::uint64_t seed, std::vector<Hole>* holes) {
  DepthImage out = img;
  if (img.depth.empty()) return out;
  CounterRng rng(seed, 0, Stream::kDepthNoise);

  const std::vector<bool> edge = depth_edges(img, params.edge_grad_thresh);
  for (std::size_t i = 0; i < edge.size(); ++i) {
    if (!edge[i]) continue;
    if (rng.bernoulli(params.p_edge_drop)) {
      out.depth[i] = kInvalidDepth;
    } else {
      // Keep perturbed pixels valid.
      out.depth[i] = std::max(1e-6, out.depth[i] + params.sigma_edge * rng.normal());
    }
  }

  const int span = params.n_holes_max - params.n_holes_min + 1;
  const int n_holes =
      params.n_holes_min +
      (span > 1 ? static_cast<int>(rng.below(static_cast<std::uint64_t>(span)))
                : 0);
  for (int h = 0; h < n_holes; ++h) {
    Hole hole;
    hole.u = std::floor(rng.uniform() * img.width);
    hole.v = std::floor(rng.uniform() * img.height);
    hole.radius = rng.uniform(params.hole_radius_min, params.hole_radius_max);
    const int r = static_cast<int>(std::ceil(hole.radius));
    for (int v = static_cast<int>(hole.v) - r; v <= hole.v + r; ++v) {
      for (int u = static_cast<int>(hole.u) - r; u <= hole.u + r; ++u) {
        if (u < 0 || v < 0 || u >= img.width || v >= img.height) continue;
        const double du = u - hole.u, dv = v - hole.v;
        if (du * du + dv * dv <= hole.radius * hole.radius) {
          out.at(u, v) = kInvalidDepth;
        }
      }
    }
    if (holes) holes->push_back(hole);
  }
  return out;
}

PointCloud depth_to_cloud(const DepthImage& img) {
  img.validate();
  PointCloud cloud;
  const Intrinsics& k = img.intrinsics;
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      if (!img.valid(u, v)) continue;
      const double d = img.at(u, v);
      cloud.points.emplace_back((u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d);
    }
  }
  return cloud;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0.0)) throw std::invalid_argument("voxel size must be > 0");
  struct Acc {
    Vec3 sum = Vec3::Zero();
    std::size_t count = 0;
  };
  std::map<std::array<std::int64_t, 3>, Acc> cells;
  for (const Vec3& p : cloud.points) {
    const std::array<std::int64_t, 3> key = {
        static_cast<std::int64_t>(std::floor(p.x() / voxel)),
        static_cast<std::int64_t>(std::floor(p.y() / voxel)),
        static_cast<std::int64_t>(std::floor(p.z() / voxel))};
    Acc& a = cells[key];
    a.sum += p;
    ++a.count;
  }
  PointCloud out;
  out.frame = cloud.frame;
  out.points.reserve(cells.size());
  for (const auto& [key, acc] : cells) {
    out.points.push_back(acc.sum / static_cast<double>(acc.count));
  }
  return out;
}

namespace {

// Static k-d tree over a point set; nodes are index ranges split at the
// median of the widest axis.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& pts) : pts_(pts), idx_(pts.size()) {
    std::iota(idx_.begin(), idx_.end(), 0);
    if (!pts.empty()) build(0, pts.size());
  }

  // k nearest neighbours of point i, excluding i itself; squared distances.
  std::vector<double> knn(std::size_t i, int k) const {
    std::priority_queue<double> heap;  // max-heap of squared distances
    search(0, pts_.size(), i, k, heap);
    std::vector<double> out;
    while (!heap.empty()) {
      out.push_back(heap.top());
      heap.pop();
    }
    return out;
  }

 private:
  struct Node {
    int axis;
    double split;
  };
  const std::vector<Vec3>& pts_;
  std::vector<std::size_t> idx_;
  std::map<std::pair<std::size_t, std::size_t>, Node> nodes_;
  static constexpr std::size_t kLeaf = 8;

  void build(std::size_t lo, std::size_t hi) {
    if (hi - lo <= kLeaf) return;
    Vec3 mn = Vec3::Constant(INFINITY), mx = Vec3::Constant(-INFINITY);
    for (std::size_t i = lo; i < hi; ++i) {
      mn = mn.cwiseMin(pts_[idx_[i]]);
      mx = mx.cwiseMax(pts_[idx_[i]]);
    }
    int axis;
    (mx - mn).maxCoeff(&axis);
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](std::size_t a, std::size_t b) {
                       return pts_[a][axis] < pts_[b][axis];
                     });
    nodes_[{lo, hi}] = {axis, pts_[idx_[mid]][axis]};
    build(lo, mid);
    build(mid, hi);
  }

  void search(std::size_t lo, std::size_t hi, std::size_t q, int k,
              std::priority_queue<double>& heap) const {
    const Vec3& p = pts_[q];
    if (hi - lo <= kLeaf) {
      for (std::size_t i = lo; i < hi; ++i) {
        if (idx_[i] == q) continue;
        const double d2 = (pts_[idx_[i]] - p).squaredNorm();
        if (static_cast<int>(heap.size()) < k) {
          heap.push(d2);
        } else if (d2 < heap.top()) {
          heap.pop();
          heap.push(d2);
        }
      }
      return;
    }
    const Node& node = nodes_.at({lo, hi});
    const std::size_t mid = lo + (hi - lo) / 2;
    const double diff = p[node.axis] - node.split;
    const bool left_first = diff < 0.0;
    search(left_first ? lo : mid, left_first ? mid : hi, q, k, heap);
    if (static_cast<int>(heap.size()) < k || diff * diff <= heap.top()) {
      search(left_first ? mid : lo, left_first ? hi : mid, q, k, heap);
    }
  }
};

}  // namespace

std::vector<double> mean_knn_distances(const PointCloud& cloud, int k) {
  if (k < 1) throw std::invalid_argument("sor: k must be >= 1");
  const KdTree tree(cloud.points);
  std::vector<double> mean(cloud.size(), 0.0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto d2 = tree.knn(i, k);
    double sum = 0.0;
    for (double v : d2) sum += std::sqrt(v);
    mean[i] = d2.empty() ? 0.0 : sum / static_cast<double>(d2.size());
  }
  return mean;
}

OutlierResult remove_statistical_outliers(const PointCloud& cloud, int k,
                                          double std_mul) {
  OutlierResult res;
  if (cloud.empty()) {
    res.cloud = cloud;
    return res;
  }
  if (k >= static_cast<int>(cloud.size())) {
    res.cloud = cloud;
    res.skipped = true;
    return res;
  }
  const std::vector<double> mean = mean_knn_distances(cloud, k);
  const double n = static_cast<double>(mean.size());
  const double mu = std::accumulate(mean.begin(), mean.end(), 0.0) / n;
  double var = 0.0;
  for (double m : mean) var += (m - mu) * (m - mu);
  const double sigma = std::sqrt(var / n);
  const double limit = mu + std_mul * sigma;
  res.cloud.frame = cloud.frame;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (mean[i] > limit) {
      ++res.removed;
    } else {
      res.cloud.points.push_back(cloud.points[i]);
    }
  }
  return res;
}

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose,
                           const std::string& frame) {
  PointCloud out;
  out.frame = frame;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(pose * p);
  return out;
}

PointCloud fuse_clouds(const std::vector<CameraCloud>& clouds) {
  std::vector<const CameraCloud*> order;
  for (const auto& c : clouds) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(),
                   [](const CameraCloud* a, const CameraCloud* b) {
                     return a->extrinsic.camera_id < b->extrinsic.camera_id;
                   });
  PointCloud out;
  out.frame = "world";
  for (const CameraCloud* c : order) {
    for (const Vec3& p : c->cloud.points) {
      out.points.push_back(c->extrinsic.camera_to_world * p);
    }
  }
  return out;
}

PointCloud crop_foreground(const PointCloud& cloud, const Box& box) {
  PointCloud out;
  out.frame = cloud.frame;
  for (const Vec3& p : cloud.points) {
    if (box.contains(p)) out.points.push_back(p);
  }
  return out;
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write("MBPC", 4);
  le::put_u32(out, kCloudVersion);
  le::put_u32(out, static_cast<std::uint32_t>(cloud.size()));
  for (const Vec3& p : cloud.points) {
    for (int i = 0; i < 3; ++i) le::put_f32(out, static_cast<float>(p[i]));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

PointCloud read_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "MBPC") {
    throw BadMagic(path.string() + ": not an MBPC cloud");
  }
  std::uint32_t version, count;
  if (!le::get_u32(in, &version)) throw PayloadMismatch("truncated header");
  if (version != kCloudVersion) {
    throw VersionMismatch(path.string() + ": unsupported cloud version " +
                          std::to_string(version));
  }
  if (!le::get_u32(in, &count)) throw PayloadMismatch("truncated header");
  PointCloud cloud;
  cloud.frame = "world";
  cloud.points.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    float xyz[3];
    for (float& f : xyz) {
      if (!le::get_f32(in, &f)) {
        throw PayloadMismatch(path.string() + ": payload shorter than " +
                              std::to_string(count) + " points");
      }
    }
    cloud.points.emplace_back(xyz[0], xyz[1], xyz[2]);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw PayloadMismatch(path.string() + ": trailing bytes after payload");
  }
  return cloud;
}

}  // namespace mobgen
