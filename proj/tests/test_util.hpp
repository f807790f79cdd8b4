// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

#include "mobgen/rng.hpp"
#include "mobgen/robot_model.hpp"
#include "mobgen/se3.hpp"

namespace mobgen::testing {

inline constexpr double kL1 = 0.4;
inline constexpr double kL2 = 0.35;
inline constexpr double kL3 = 0.15;
inline constexpr double kShoulderX = 0.1;
inline constexpr double kShoulderZ = 0.5;

inline JointSpec make_joint(const std::string& name, JointKind kind,
                            const Vec3& origin, double lo, double hi,
                            Vec3 axis = Vec3::UnitZ()) {
  JointSpec j;
  j.name = name;
  j.kind = kind;
  j.axis = axis;
  j.origin = Pose::Translation(origin);
  j.min = lo;
  j.max = hi;
  j.v_max = 1.0;
  j.a_max = 2.0;
  return j;
}

// Planar base plus a 3-link planar arm with revolute z joints. The
// end-effector frame is the last link frame shifted by kL3 along x.
inline RobotModel planar_arm(bool with_sphere = true) {
  std::vector<JointSpec> j;
  j.push_back(make_joint("base_x", JointKind::kPlanarX, Vec3::Zero(), -5, 5));
  j.push_back(make_joint("base_y", JointKind::kPlanarY, Vec3::Zero(), -5, 5));
  j.push_back(make_joint("base_yaw", JointKind::kPlanarYaw, Vec3::Zero(),
                         -M_PI, M_PI));
  j.push_back(make_joint("j1", JointKind::kRevolute,
                         Vec3(kShoulderX, 0, kShoulderZ), -2.6, 2.6));
  j.push_back(make_joint("j2", JointKind::kRevolute, Vec3(kL1, 0, 0), -2.6, 2.6));
  j.push_back(make_joint("j3", JointKind::kRevolute, Vec3(kL2, 0, 0), -2.6, 2.6));
  std::vector<CollisionSphere> spheres;
  if (with_sphere) spheres.push_back({2, Vec3(0, 0, 0.25), 0.3});
  return RobotModel(std::move(j), Pose::Translation(Vec3(kL3, 0, 0)),
                    std::move(spheres), "planar_arm");
}

// Cumulative-angle FK of planar_arm, written independently of RobotModel.
inline Vec3 planar_arm_position(const Eigen::VectorXd& q) {
  const double a1 = q[3], a12 = a1 + q[4], a123 = a12 + q[5];
  const double lx = kShoulderX + kL1 * std::cos(a1) + kL2 * std::cos(a12) +
                    kL3 * std::cos(a123);
  const double ly = kL1 * std::sin(a1) + kL2 * std::sin(a12) +
                    kL3 * std::sin(a123);
  const double c = std::cos(q[2]), s = std::sin(q[2]);
  return Vec3(q[0] + c * lx - s * ly, q[1] + s * lx + c * ly, kShoulderZ);
}

inline Vec3 random_unit(CounterRng& rng) {
  Vec3 v(rng.normal(), rng.normal(), rng.normal());
  return v.normalized();
}

inline Pose random_pose(CounterRng& rng, double max_angle = M_PI - 1e-3,
                        double max_t = 2.0) {
  const Vec3 axis = random_unit(rng);
  const double angle = rng.uniform(0.0, max_angle);
  const Vec3 t(rng.uniform(-max_t, max_t), rng.uniform(-max_t, max_t),
               rng.uniform(-max_t, max_t));
  return Pose(Quat(Eigen::AngleAxisd(angle, axis)), t);
}

inline Eigen::VectorXd random_config(const RobotModel& m, CounterRng& rng,
                                     double shrink = 0.8) {
  Eigen::VectorXd q(m.dofs());
  for (int i = 0; i < m.dofs(); ++i) {
    const double mid = 0.5 * (m.joint(i).min + m.joint(i).max);
    const double half = 0.5 * (m.joint(i).max - m.joint(i).min) * shrink;
    q[i] = rng.uniform(mid - half, mid + half);
  }
  return q;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("mobgen_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const {
    return path_ / s;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace mobgen::testing
