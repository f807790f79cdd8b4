// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Mobile manipulator kinematics. The base is three virtual joints
// (planar-x, planar-y, planar-yaw) prepended to a serial arm, so whole-body
// motion is a single joint-space problem.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mobgen/se3.hpp"

namespace mobgen {

enum class JointKind { kRevolute, kPrismatic, kPlanarX, kPlanarY, kPlanarYaw };

const char* to_string(JointKind kind);
JointKind joint_kind_from_string(const std::string& s);
bool is_rotational(JointKind kind);

struct JointSpec {
  std::string name;
  JointKind kind = JointKind::kRevolute;
  Vec3 axis = Vec3::UnitZ();
  Pose origin;  // relative to the parent frame
  double min = -M_PI;
  double max = M_PI;
  double v_max = 1.0;
  double a_max = 1.0;

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
  /// Local transform contributed by this joint at value q (origin included).
  Pose transform(double q) const;
};

struct CollisionSphere {
  int link = 0;  // index of the joint whose frame carries the sphere
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

using Configuration = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Which joints an operation may move.
enum class JointGroup { kWholeBody, kBaseOnly, kArmOnly };

class RobotModel {
 public:
  static constexpr int kBaseDofs = 3;
  static constexpr int kYawIndex = 2;

  RobotModel(std::vector<JointSpec> joints, Pose eef_offset,
             std::vector<CollisionSphere> spheres = {},
             std::string name = "robot");

  static RobotModel FromYaml(const std::string& text);
  static RobotModel Load(const std::filesystem::path& path);
  std::string ToYaml() const;

  int dofs() const { return static_cast<int>(joints_.size()); }
  int arm_dofs() const { return dofs() - kBaseDofs; }
  const std::string& name() const { return name_; }
  const std::vector<JointSpec>& joints() const { return joints_; }
  const JointSpec& joint(int i) const { return joints_.at(i); }
  const Pose& eef_offset() const { return eef_offset_; }
  const std::vector<CollisionSphere>& collision_spheres() const {
    return spheres_;
  }

  Eigen::VectorXd lower() const;
  Eigen::VectorXd upper() const;
  Eigen::VectorXd v_max() const;
  Eigen::VectorXd a_max() const;
  /// 1 for joints movable in the group, 0 otherwise.
  Eigen::VectorXd mask(JointGroup group) const;

  bool within_limits(const Configuration& q, double tol = 0.0) const;
  Configuration clamp(const Configuration& q) const;

  /// World frame of every joint (after its motion), in chain order.
  std::vector<Pose> link_frames(const Configuration& q) const;
  Pose forward_kinematics(const Configuration& q) const;
  /// Geometric Jacobian of the end-effector in the world frame; rows are
  /// (angular; linear), the linear part taken at the end-effector origin.
  Jacobian jacobian(const Configuration& q) const;
  /// 3 x n world-frame Jacobian of a point rigidly attached to a link.
  Eigen::Matrix3Xd point_jacobian(const std::vector<Pose>& frames, int link,
                                  const Vec3& world_point) const;
  std::vector<Vec3> sphere_centers(const std::vector<Pose>& frames) const;

 private:
  std::string name_;
  std::vector<JointSpec> joints_;
  Pose eef_offset_;
  std::vector<CollisionSphere> spheres_;

  void check_dims(const Configuration& q) const;
};

struct IkOptions {
  int max_iters = 200;
  double tol = 1e-4;
  double damping = 0.05;
  double max_step = 0.2;
  JointGroup group = JointGroup::kWholeBody;
};

/// Damped least-squares IK. Returns nullopt when the target is not reached
/// within max_iters; a returned configuration always meets the tolerance and
/// the joint limits.
std::optional<Configuration> ik_damped_least_squares(
    const RobotModel& model, const Pose& target, const Configuration& seed,
    const IkOptions& opts = {});

}  // namespace mobgen
