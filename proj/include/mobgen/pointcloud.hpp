// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Depth-sensor realism and point-cloud preprocessing: depth noise injection,
// pinhole back-projection, voxel downsampling, statistical outlier removal,
// multi-camera fusion and workspace cropping. Simulated and real frames go
// through the same functions.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mobgen/se3.hpp"

namespace mobgen {

/// Depth value marking a missing measurement.
inline constexpr double kInvalidDepth = 0.0;

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
};

struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  // row-major, meters
  Intrinsics intrinsics;

  DepthImage() = default;
  DepthImage(int w, int h, Intrinsics k, double fill = kInvalidDepth);
  double& at(int u, int v) { return depth[static_cast<std::size_t>(v) * width + u]; }
  double at(int u, int v) const {
    return depth[static_cast<std::size_t>(v) * width + u];
  }
  bool valid(int u, int v) const;
  void validate() const;
};

struct PointCloud {
  std::vector<Vec3> points;
  std::string frame = "camera";

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool operator==(const PointCloud& o) const = default;
};

struct CameraExtrinsic {
  Pose camera_to_world;
  int camera_id = 0;
};

struct DepthNoiseParams {
  double edge_grad_thresh = 0.05;  // m per pixel
  double p_edge_drop = 0.5;
  double sigma_edge = 0.01;        // m
  int n_holes_min = 0;
  int n_holes_max = 5;
  double hole_radius_min = 2.0;    // pixels
  double hole_radius_max = 10.0;
};

struct Hole {
  double u = 0.0;
  double v = 0.0;
  double radius = 0.0;
};

/// Pixels whose largest 4-neighbour depth jump exceeds edge_grad_thresh are
/// dropped with probability p_edge_drop, otherwise perturbed by N(0,
/// sigma_edge); then random disks are invalidated. Deterministic in seed.
DepthImage inject_depth_noise(const DepthImage& img,
                              const DepthNoiseParams& params,
                              std::uint64_t seed,
                              std::vector<Hole>* holes = nullptr);

/// Row-major mask of discontinuity pixels used by inject_depth_noise.
std::vector<bool> depth_edges(const DepthImage& img, double grad_thresh);

PointCloud depth_to_cloud(const DepthImage& img);

/// One centroid per occupied voxel, ordered by (ix, iy, iz).
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

struct OutlierResult {
  PointCloud cloud;
  std::size_t removed = 0;
  /// Set when k >= point count; the cloud is returned unchanged.
  bool skipped = false;
};

/// Removes points whose mean distance to their k nearest neighbours exceeds
/// mu + std_mul * sigma of that statistic over the cloud.
OutlierResult remove_statistical_outliers(const PointCloud& cloud, int k,
                                          double std_mul);

/// Mean k-nearest-neighbour distance of every point (k-d tree search).
std::vector<double> mean_knn_distances(const PointCloud& cloud, int k);

struct CameraCloud {
  PointCloud cloud;
  CameraExtrinsic extrinsic;
};

/// Transforms each cloud to the world frame, concatenated by camera id.
PointCloud fuse_clouds(const std::vector<CameraCloud>& clouds);

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

PointCloud crop_foreground(const PointCloud& cloud, const Box& box);

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose,
                           const std::string& frame);

/// "MBPC" cloud files: magic, version u32, count u32, float32 xyz triples,
/// all little-endian.
inline constexpr std::uint32_t kCloudVersion = 1;
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_cloud(const std::filesystem::path& path);

}  // namespace mobgen
