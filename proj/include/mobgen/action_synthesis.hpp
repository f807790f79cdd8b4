// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Key end-effector pose sequences: virtual-kinematic-chain sweeps for
// articulated objects, functional-axis alignment for pick-and-place, and
// motion-primitive task scripts.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobgen/robot_model.hpp"
#include "mobgen/scene.hpp"
#include "mobgen/se3.hpp"

namespace mobgen {

/// Invalid task script or a script step that cannot be realized.
class TaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Gripper { kOpen, kClose, kHold };
enum class Phase { kApproach, kGrasp, kManipulate, kRetreat };

const char* to_string(Gripper g);
const char* to_string(Phase p);

struct EefWaypoint {
  Pose pose;
  Gripper gripper = Gripper::kHold;
  Phase phase = Phase::kApproach;
};

struct EefWaypointPlan {
  std::vector<EefWaypoint> waypoints;
};

/// End-effector poses that keep the gripper rigidly attached to the moving
/// link while its joint goes linearly from theta_init to theta_goal:
/// pose_t = link(theta_t) * link(theta_init)^-1 * eef_init.
std::vector<Pose> vkc_eef_trajectory(const ArticulatedObject& obj,
                                     const Pose& eef_init, double theta_init,
                                     double theta_goal, int steps = 20);

/// World pose for `held` that makes its functional axis anti-parallel to the
/// target's and puts the axis points `standoff` apart along the target axis,
/// using the minimal rotation.
Pose align_functional_axes(const RigidObject& held, const Pose& held_pose,
                           const RigidObject& target, const Pose& target_pose,
                           double standoff);

/// Pre-grasp pose: the grasp backed off along its own -z.
Pose approach_pose(const Pose& grasp, double retreat = 0.08);

enum class PrimitiveKind {
  kApproach,
  kMoveBase,
  kMoveArm,
  kMoveWholeBody,
  kGripperOpen,
  kGripperClose,
  kVkc,
  kAlign,
};

const char* to_string(PrimitiveKind k);
PrimitiveKind primitive_kind_from_string(const std::string& s);

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kGripperOpen;
  std::string object;  // approach / vkc
  std::string target;  // align
  double goal = 0.0;   // vkc joint goal
  double standoff = 0.0;
  int steps = 20;
  std::optional<Pose> pose;     // absolute eef target for move-*
  Vec3 offset = Vec3::Zero();   // world displacement for move-*
  double yaw = 0.0;             // rotation about world z for move-*
  std::optional<JointGroup> planner;
};

std::vector<Primitive> parse_script(const std::string& yaml_text);

struct PlanStep {
  PrimitiveKind kind = PrimitiveKind::kGripperOpen;
  JointGroup group = JointGroup::kWholeBody;
  bool gripper_only = false;
  std::vector<EefWaypoint> waypoints;
  /// VKC sweeps: the swept object and its joint value per waypoint.
  int articulated = -1;
  std::vector<double> joint_values;
};

struct TaskPlan {
  EefWaypointPlan plan;
  std::vector<PlanStep> steps;
};

/// Expands a script against a scene, tracking the held object and joint
/// values as the steps execute.
TaskPlan compose_primitives(const std::vector<Primitive>& primitives,
                            const SceneState& scene, const Pose& eef_init,
                            double grasp_radius = 0.05);

}  // namespace mobgen
