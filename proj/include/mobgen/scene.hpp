// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Articulated and rigid objects with grasp and functional-axis annotations,
// randomized episode reset and success predicates.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mobgen/robot_model.hpp"
#include "mobgen/se3.hpp"

namespace mobgen {

struct ArticulatedObject {
  std::string name;
  /// Relative to the parent's moving link when parent is set, else world.
  Pose base_pose;
  JointSpec joint;  // revolute (doors) or prismatic (drawers)
  Pose link_origin;
  Pose handle_grasp;  // relative to the moving link
  double joint_value = 0.0;
  std::optional<int> parent;  // index into SceneState::articulated

  void validate() const;
};

/// World pose of the moving link at joint value theta:
/// base_pose * joint_motion(theta) * link_origin.
Pose link_pose(const ArticulatedObject& obj, double theta);
Pose world_grasp(const ArticulatedObject& obj, double theta);

struct FunctionalAxis {
  Vec3 point = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
};

struct RigidObject {
  std::string name;
  Pose pose;
  Pose grasp;  // relative to the object
  std::optional<FunctionalAxis> functional_axis;
  double extent = 0.05;  // bounding radius, meters

  void validate() const;
};

/// Keep-out sphere, optionally attached to an object's frame.
struct Obstacle {
  Vec3 center = Vec3::Zero();
  double radius = 0.1;
  std::string attach;  // object name, empty for world
};

struct ResetSpec {
  Vec3 position_min = Vec3::Zero();  // offsets added to template positions
  Vec3 position_max = Vec3::Zero();
  double yaw_min = 0.0;
  double yaw_max = 0.0;
  double scale_min = 1.0;
  double scale_max = 1.0;
  Eigen::VectorXd arm_min;  // empty: keep the template arm configuration
  Eigen::VectorXd arm_max;
  std::uint64_t seed = 0;
  /// Objects the randomization applies to; empty means every top-level
  /// object.
  std::vector<std::string> targets;

  void validate(int arm_dofs) const;
};

enum class SuccessKind { kDistance, kJointAngle };

struct SuccessPredicate {
  SuccessKind kind = SuccessKind::kDistance;
  double threshold = 0.02;
  double target_joint_value = 0.0;
  std::string object;  // articulated object (joint-angle) or held object
  std::string target;  // distance kind: reference object

  void validate() const;
};

/// Per-object draws made at reset, kept as demonstration metadata.
struct ObjectDraw {
  std::string name;
  Vec3 offset = Vec3::Zero();
  double yaw = 0.0;
  double scale = 1.0;
};

struct SceneState {
  std::uint64_t seed = 0;
  std::uint64_t episode = 0;
  Configuration robot;
  bool gripper_closed = false;
  std::vector<ArticulatedObject> articulated;
  std::vector<RigidObject> rigid;
  std::vector<Obstacle> obstacles;
  std::vector<ObjectDraw> draws;

  int find_articulated(const std::string& name) const;  // -1 if absent
  int find_rigid(const std::string& name) const;
  /// World base pose of an articulated object, resolving parents.
  Pose world_base(int index) const;
  /// Copy of the object with base_pose expressed in the world frame.
  ArticulatedObject resolved(int index) const;
  Pose world_link(int index) const;
  /// World pose of the frame an obstacle is attached to.
  Pose obstacle_frame(const Obstacle& o) const;
  std::vector<std::pair<Vec3, double>> world_obstacles() const;
  /// World point of an object used for distance predicates: the functional
  /// axis point when annotated, else the object origin.
  Vec3 reference_point(const std::string& name) const;
};

/// Template scene plus reset spec.
struct SceneTemplate {
  Configuration robot;
  std::vector<ArticulatedObject> articulated;
  std::vector<RigidObject> rigid;
  std::vector<Obstacle> obstacles;
};

/// Deterministic in (spec.seed, episode_index): the robot base sits at the
/// world origin with zero yaw, object offsets/yaw/scale and arm joints are
/// drawn uniformly from the ranges.
SceneState reset_episode(const SceneTemplate& scene, const ResetSpec& spec,
                         std::uint64_t episode_index);

bool check_success(const SceneState& state, const SuccessPredicate& pred);

/// Signed distance used by check_success (meters or joint units).
double success_error(const SceneState& state, const SuccessPredicate& pred);

}  // namespace mobgen
