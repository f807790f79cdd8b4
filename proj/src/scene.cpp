// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "mobgen/scene.hpp"

#include <algorithm>
#include <cmath>

#include "mobgen/errors.hpp"
#include "mobgen/rng.hpp"

namespace mobgen {

void ArticulatedObject::validate() const {
  if (joint.kind != JointKind::kRevolute &&
      joint.kind != JointKind::kPrismatic) {
    throw ConfigError("articulated object '" + name +
                      "': joint must be revolute or prismatic");
  }
  joint.validate();
  if (joint_value < joint.min || joint_value > joint.max) {
    throw ConfigError("articulated object '" + name +
                      "': joint value outside limits");
  }
}

Pose link_pose(const ArticulatedObject& obj, double theta) {
  return obj.base_pose * obj.joint.transform(theta) * obj.link_origin;
}

Pose world_grasp(const ArticulatedObject& obj, double theta) {
  return link_pose(obj, theta) * obj.handle_grasp;
}

void RigidObject::validate() const {
  if (functional_axis &&
      std::abs(functional_axis->direction.norm() - 1.0) > 1e-9) {
    throw ConfigError("rigid object '" + name +
                      "': functional axis direction must be unit-norm");
  }
  if (!(extent > 0.0)) throw ConfigError("rigid object '" + name + "': extent");
}

void ResetSpec::validate(int arm_dofs) const {
  for (int i = 0; i < 3; ++i) {
    if (position_min[i] > position_max[i]) {
      throw ConfigError("reset: position_min > position_max");
    }
  }
  if (yaw_min > yaw_max) throw ConfigError("reset: yaw_min > yaw_max");
  if (!(scale_min > 0.0) || scale_min > scale_max) {
    throw ConfigError("reset: scale range must be positive and ordered");
  }
  if (arm_min.size() != arm_max.size()) {
    throw ConfigError("reset: arm_min/arm_max sizes differ");
  }
  if (arm_min.size() != 0 && arm_min.size() != arm_dofs) {
    throw ConfigError("reset: arm ranges must cover every arm joint");
  }
  for (int i = 0; i < arm_min.size(); ++i) {
    if (arm_min[i] > arm_max[i]) throw ConfigError("reset: arm_min > arm_max");
  }
}

void SuccessPredicate::validate() const {
  if (!(threshold > 0.0)) throw ConfigError("success: threshold must be > 0");
  if (object.empty()) throw ConfigError("success: object is required");
  if (kind == SuccessKind::kDistance && target.empty()) {
    throw ConfigError("success: distance predicate needs a target");
  }
}

int SceneState::find_articulated(const std::string& name) const {
  for (std::size_t i = 0; i < articulated.size(); ++i) {
    if (articulated[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int SceneState::find_rigid(const std::string& name) const {
  for (std::size_t i = 0; i < rigid.size(); ++i) {
    if (rigid[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Pose SceneState::world_base(int index) const {
  const ArticulatedObject& obj = articulated.at(index);
  if (!obj.parent) return obj.base_pose;
  if (*obj.parent >= index) {
    throw ConfigError("articulated object '" + obj.name +
                      "': parent must precede child");
  }
  return world_link(*obj.parent) * obj.base_pose;
}

ArticulatedObject SceneState::resolved(int index) const {
  ArticulatedObject obj = articulated.at(index);
  obj.base_pose = world_base(index);
  obj.parent.reset();
  return obj;
}

Pose SceneState::world_link(int index) const {
  const ArticulatedObject obj = resolved(index);
  return link_pose(obj, obj.joint_value);
}

Pose SceneState::obstacle_frame(const Obstacle& o) const {
  if (o.attach.empty()) return Pose();
  if (const int a = find_articulated(o.attach); a >= 0) return world_base(a);
  if (const int r = find_rigid(o.attach); r >= 0) return rigid[r].pose;
  throw ConfigError("obstacle attached to unknown object '" + o.attach + "'");
}

std::vector<std::pair<Vec3, double>> SceneState::world_obstacles() const {
  std::vector<std::pair<Vec3, double>> out;
  for (const auto& o : obstacles) {
    out.emplace_back(obstacle_frame(o) * o.center, o.radius);
  }
  return out;
}

Vec3 SceneState::reference_point(const std::string& name) const {
  if (const int r = find_rigid(name); r >= 0) {
    const RigidObject& obj = rigid[r];
    if (obj.functional_axis) return obj.pose * obj.functional_axis->point;
    return obj.pose.translation();
  }
  if (const int a = find_articulated(name); a >= 0) {
    return world_link(a).translation();
  }
  throw ConfigError("unknown object '" + name + "'");
}

SceneState reset_episode(const SceneTemplate& scene, const ResetSpec& spec,
                         std::uint64_t episode_index) {
  const int arm_dofs =
      static_cast<int>(scene.robot.size()) - RobotModel::kBaseDofs;
  spec.validate(arm_dofs);

  SceneState state;
  state.seed = spec.seed;
  state.episode = episode_index;
  state.articulated = scene.articulated;
  state.rigid = scene.rigid;
  state.obstacles = scene.obstacles;
  state.robot = scene.robot;
  state.robot.head(RobotModel::kBaseDofs).setZero();

  CounterRng pos_rng(spec.seed, episode_index, Stream::kObjectPosition);
  CounterRng yaw_rng(spec.seed, episode_index, Stream::kObjectYaw);
  CounterRng scale_rng(spec.seed, episode_index, Stream::kObjectScale);
  CounterRng arm_rng(spec.seed, episode_index, Stream::kArmJoints);

  auto selected = [&](const std::string& name, bool top_level) {
    if (spec.targets.empty()) return top_level;
    return std::find(spec.targets.begin(), spec.targets.end(), name) !=
           spec.targets.end();
  };
  auto draw = [&](const std::string& name) {
    ObjectDraw d;
    d.name = name;
    for (int i = 0; i < 3; ++i) {
      d.offset[i] = pos_rng.uniform(spec.position_min[i], spec.position_max[i]);
    }
    d.yaw = yaw_rng.uniform(spec.yaw_min, spec.yaw_max);
    d.scale = scale_rng.uniform(spec.scale_min, spec.scale_max);
    return d;
  };
  auto moved = [](const Pose& p, const ObjectDraw& d) {
    return Pose(Quat(Eigen::AngleAxisd(d.yaw, Vec3::UnitZ())) * p.rotation(),
                p.translation() + d.offset);
  };
  auto scale_obstacles = [&](const std::string& name, double s) {
    for (auto& o : state.obstacles) {
      if (o.attach == name) {
        o.center *= s;
        o.radius *= s;
      }
    }
  };

  for (auto& obj : state.articulated) {
    if (!selected(obj.name, !obj.parent)) continue;
    const ObjectDraw d = draw(obj.name);
    obj.base_pose = moved(obj.base_pose, d);
    obj.link_origin = Pose(obj.link_origin.rotation(),
                           obj.link_origin.translation() * d.scale);
    obj.handle_grasp = Pose(obj.handle_grasp.rotation(),
                            obj.handle_grasp.translation() * d.scale);
    scale_obstacles(obj.name, d.scale);
    state.draws.push_back(d);
  }
  for (auto& obj : state.rigid) {
    if (!selected(obj.name, true)) continue;
    const ObjectDraw d = draw(obj.name);
    obj.pose = moved(obj.pose, d);
    obj.grasp = Pose(obj.grasp.rotation(), obj.grasp.translation() * d.scale);
    obj.extent *= d.scale;
    if (obj.functional_axis) obj.functional_axis->point *= d.scale;
    scale_obstacles(obj.name, d.scale);
    state.draws.push_back(d);
  }
  for (int i = 0; i < spec.arm_min.size(); ++i) {
    state.robot[RobotModel::kBaseDofs + i] =
        arm_rng.uniform(spec.arm_min[i], spec.arm_max[i]);
  }
  return state;
}

double success_error(const SceneState& state, const SuccessPredicate& pred) {
  if (pred.kind == SuccessKind::kDistance) {
    return (state.reference_point(pred.object) -
            state.reference_point(pred.target))
        .norm();
  }
  const int a = state.find_articulated(pred.object);
  if (a < 0) throw ConfigError("unknown articulated object '" + pred.object + "'");
  return std::abs(state.articulated[a].joint_value - pred.target_joint_value);
}

bool check_success(const SceneState& state, const SuccessPredicate& pred) {
  return success_error(state, pred) < pred.threshold;
}

}  // namespace mobgen
