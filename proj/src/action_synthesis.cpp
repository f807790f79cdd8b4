// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "mobgen/action_synthesis.hpp"

#include <cmath>
#include <limits>

#include "mobgen/errors.hpp"
#include "yaml_util.hpp"

namespace mobgen {

const char* to_string(Gripper g) {
  switch (g) {
    case Gripper::kOpen: return "open";
    case Gripper::kClose: return "close";
    case Gripper::kHold: return "hold";
  }
  return "?";
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::kApproach: return "approach";
    case Phase::kGrasp: return "grasp";
    case Phase::kManipulate: return "manipulate";
    case Phase::kRetreat: return "retreat";
  }
  return "?";
}

const char* to_string(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::kApproach: return "approach";
    case PrimitiveKind::kMoveBase: return "move-base";
    case PrimitiveKind::kMoveArm: return "move-arm";
    case PrimitiveKind::kMoveWholeBody: return "move-whole-body";
    case PrimitiveKind::kGripperOpen: return "gripper-open";
    case PrimitiveKind::kGripperClose: return "gripper-close";
    case PrimitiveKind::kVkc: return "vkc";
    case PrimitiveKind::kAlign: return "align";
  }
  return "?";
}

PrimitiveKind primitive_kind_from_string(const std::string& s) {
  for (auto k : {PrimitiveKind::kApproach, PrimitiveKind::kMoveBase,
                 PrimitiveKind::kMoveArm, PrimitiveKind::kMoveWholeBody,
                 PrimitiveKind::kGripperOpen, PrimitiveKind::kGripperClose,
                 PrimitiveKind::kVkc, PrimitiveKind::kAlign}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown primitive '" + s + "'");
}

std::vector<Pose> vkc_eef_trajectory(const ArticulatedObject& obj,
                                     const Pose& eef_init, double theta_init,
                                     double theta_goal, int steps) {
  if (steps < 2) throw std::invalid_argument("vkc: steps must be >= 2");
  for (double th : {theta_init, theta_goal}) {
    if (th < obj.joint.min || th > obj.joint.max) {
      throw std::out_of_range("vkc: joint value " + std::to_string(th) +
                              " outside limits of '" + obj.name + "'");
    }
  }
  // Grasp expressed in the moving-link frame; constant along the sweep.
  const Pose link_to_eef = link_pose(obj, theta_init).inverse() * eef_init;
  std::vector<Pose> out;
  out.reserve(steps);
  out.push_back(eef_init);
  for (int i = 1; i < steps; ++i) {
    const double alpha = static_cast<double>(i) / (steps - 1);
    const double theta = theta_init + alpha * (theta_goal - theta_init);
    out.push_back(link_pose(obj, theta) * link_to_eef);
  }
  return out;
}

Pose align_functional_axes(const RigidObject& held, const Pose& held_pose,
                           const RigidObject& target, const Pose& target_pose,
                           double standoff) {
  if (!held.functional_axis || !target.functional_axis) {
    throw TaskError("align: both objects need a functional axis");
  }
  const Vec3 d_held = held_pose.rotation() * held.functional_axis->direction;
  const Vec3 d_target =
      target_pose.rotation() * target.functional_axis->direction;
  const Vec3 p_target = target_pose * target.functional_axis->point;

  const Vec3 want = -d_target;
  Quat delta = Quat::FromTwoVectors(d_held, want);
  if (d_held.dot(want) < -1.0 + 1e-12) {
    // Opposite directions: half turn about a horizontal axis normal to d_held.
    Vec3 axis = Vec3::UnitZ().cross(d_held);
    if (axis.norm() < 1e-9) axis = Vec3::UnitX();
    delta = Quat(Eigen::AngleAxisd(M_PI, axis.normalized()));
  }
  const Quat rotation = delta * held_pose.rotation();
  const Vec3 translation = p_target + standoff * d_target -
                           rotation * held.functional_axis->point;
  return Pose(rotation, translation);
}

Pose approach_pose(const Pose& grasp, double retreat) {
  return grasp * Pose::Translation(Vec3(0.0, 0.0, -retreat));
}

std::vector<Primitive> parse_script(const std::string& yaml_text) {
  const YAML::Node root = yaml::parse(yaml_text, "task script");
  const YAML::Node list = root.IsMap() ? root["script"] : root;
  if (!list || !list.IsSequence()) {
    throw ConfigError("task script: expected a list of primitives");
  }
  std::vector<Primitive> out;
  for (const auto& n : list) {
    const std::string ctx = "script step " + std::to_string(out.size());
    Primitive p;
    p.kind = primitive_kind_from_string(yaml::get<std::string>(n, "op", ctx));
    p.object = yaml::get_or<std::string>(n, "object", "", ctx);
    p.target = yaml::get_or<std::string>(n, "target", "", ctx);
    p.goal = yaml::get_or<double>(n, "goal", 0.0, ctx);
    p.standoff = yaml::get_or<double>(n, "standoff", 0.0, ctx);
    p.steps = yaml::get_or<int>(n, "steps", 20, ctx);
    p.yaw = yaml::get_or<double>(n, "yaw", 0.0, ctx);
    if (n["offset"]) p.offset = yaml::vec3(n["offset"], ctx + ".offset");
    if (n["pose"]) p.pose = yaml::pose(n["pose"], ctx + ".pose");
    if (n["planner"]) {
      const auto g = yaml::get<std::string>(n, "planner", ctx);
      if (g == "whole-body") p.planner = JointGroup::kWholeBody;
      else if (g == "base-only") p.planner = JointGroup::kBaseOnly;
      else if (g == "arm-only") p.planner = JointGroup::kArmOnly;
      else throw ConfigError(ctx + ": unknown planner '" + g + "'");
    }
    out.push_back(p);
  }
  return out;
}

namespace {

struct Composer {
  SceneState scene;
  Pose eef;
  double grasp_radius;
  int held_rigid = -1;
  int held_articulated = -1;
  Pose held_rel = Pose::Identity();  // held rigid object pose in the eef frame
  bool ever_closed = false;
  TaskPlan out = {};

  bool holding() const { return held_rigid >= 0 || held_articulated >= 0; }

  Phase phase_for(PrimitiveKind k) const {
    if (k == PrimitiveKind::kGripperClose) return Phase::kGrasp;
    if (holding()) return Phase::kManipulate;
    return ever_closed ? Phase::kRetreat : Phase::kApproach;
  }

  Pose grasp_of(const std::string& name) const {
    if (const int r = scene.find_rigid(name); r >= 0) {
      return scene.rigid[r].pose * scene.rigid[r].grasp;
    }
    if (const int a = scene.find_articulated(name); a >= 0) {
      return scene.world_link(a) * scene.articulated[a].handle_grasp;
    }
    throw TaskError("unknown object '" + name + "'");
  }

  bool descends_from(int child, int ancestor) const {
    for (int i = child; i >= 0;) {
      if (i == ancestor) return true;
      const auto& p = scene.articulated[i].parent;
      i = p ? *p : -1;
    }
    return false;
  }

  PlanStep& push(const Primitive& prim, JointGroup fallback) {
    PlanStep step;
    step.kind = prim.kind;
    step.group = prim.planner.value_or(fallback);
    out.steps.push_back(step);
    return out.steps.back();
  }

  void add(PlanStep& step, const Pose& pose, Gripper g, Phase ph) {
    step.waypoints.push_back({pose, g, ph});
  }

  void move_to(const Primitive& prim, const Pose& goal, JointGroup fallback) {
    if (held_articulated >= 0) {
      throw TaskError(std::string(to_string(prim.kind)) +
                      ": cannot free-move while holding an articulated "
                      "object; use vkc");
    }
    const Phase ph = phase_for(prim.kind);
    PlanStep& step = push(prim, fallback);
    add(step, goal, Gripper::kHold, ph);
    eef = goal;
    if (held_rigid >= 0) scene.rigid[held_rigid].pose = eef * held_rel;
  }

  void apply(const Primitive& prim) {
    switch (prim.kind) {
      case PrimitiveKind::kApproach: {
        if (holding()) throw TaskError("approach: gripper is holding");
        const Pose grasp = grasp_of(prim.object);
        const Phase ph = phase_for(prim.kind);
        PlanStep& step = push(prim, JointGroup::kWholeBody);
        add(step, approach_pose(grasp), Gripper::kOpen, ph);
        add(step, grasp, Gripper::kOpen, ph);
        eef = grasp;
        break;
      }
      case PrimitiveKind::kMoveBase:
      case PrimitiveKind::kMoveArm:
      case PrimitiveKind::kMoveWholeBody: {
        const JointGroup fallback =
            prim.kind == PrimitiveKind::kMoveBase  ? JointGroup::kBaseOnly
            : prim.kind == PrimitiveKind::kMoveArm ? JointGroup::kArmOnly
                                                   : JointGroup::kWholeBody;
        const Pose goal =
            prim.pose ? *prim.pose
                      : Pose(Quat(Eigen::AngleAxisd(prim.yaw, Vec3::UnitZ())) *
                                 eef.rotation(),
                             eef.translation() + prim.offset);
        move_to(prim, goal, fallback);
        break;
      }
      case PrimitiveKind::kGripperOpen: {
        const Phase ph = holding() ? Phase::kRetreat : phase_for(prim.kind);
        PlanStep& step = push(prim, JointGroup::kWholeBody);
        step.gripper_only = true;
        add(step, eef, Gripper::kOpen, ph);
        held_rigid = -1;
        held_articulated = -1;
        break;
      }
      case PrimitiveKind::kGripperClose: {
        if (holding()) throw TaskError("gripper-close: already holding");
        double best = std::numeric_limits<double>::infinity();
        int rigid = -1, art = -1;
        for (std::size_t i = 0; i < scene.rigid.size(); ++i) {
          const double d = (grasp_of(scene.rigid[i].name).translation() -
                            eef.translation()).norm();
          if (d < best) best = d, rigid = static_cast<int>(i), art = -1;
        }
        for (std::size_t i = 0; i < scene.articulated.size(); ++i) {
          const double d = (grasp_of(scene.articulated[i].name).translation() -
                            eef.translation()).norm();
          if (d < best) best = d, art = static_cast<int>(i), rigid = -1;
        }
        if (!(best <= grasp_radius)) {
          throw TaskError("gripper-close: no graspable object within " +
                          std::to_string(grasp_radius) + " m of the gripper");
        }
        PlanStep& step = push(prim, JointGroup::kWholeBody);
        step.gripper_only = true;
        add(step, eef, Gripper::kClose, Phase::kGrasp);
        held_rigid = rigid;
        held_articulated = art;
        if (rigid >= 0) held_rel = eef.inverse() * scene.rigid[rigid].pose;
        ever_closed = true;
        break;
      }
      case PrimitiveKind::kVkc: {
        const int k = scene.find_articulated(prim.object);
        if (k < 0) throw TaskError("vkc: unknown object '" + prim.object + "'");
        if (held_articulated < 0 || !descends_from(held_articulated, k)) {
          throw TaskError("vkc: gripper is not attached to '" + prim.object +
                          "'");
        }
        const ArticulatedObject obj = scene.resolved(k);
        const double theta0 = obj.joint_value;
        const auto poses =
            vkc_eef_trajectory(obj, eef, theta0, prim.goal, prim.steps);
        PlanStep& step = push(prim, JointGroup::kWholeBody);
        step.articulated = k;
        for (int i = 0; i < prim.steps; ++i) {
          add(step, poses[i], Gripper::kHold, Phase::kManipulate);
          step.joint_values.push_back(
              theta0 + (prim.goal - theta0) * i / (prim.steps - 1));
        }
        scene.articulated[k].joint_value = prim.goal;
        eef = poses.back();
        break;
      }
      case PrimitiveKind::kAlign: {
        if (held_rigid < 0) throw TaskError("align: no rigid object held");
        const int t = scene.find_rigid(prim.target);
        if (t < 0) throw TaskError("align: unknown target '" + prim.target + "'");
        const RigidObject& held = scene.rigid[held_rigid];
        const Pose placed = align_functional_axes(
            held, held.pose, scene.rigid[t], scene.rigid[t].pose,
            prim.standoff);
        move_to(prim, placed * held_rel.inverse(), JointGroup::kWholeBody);
        break;
      }
    }
  }
};

}  // namespace

TaskPlan compose_primitives(const std::vector<Primitive>& primitives,
                            const SceneState& scene, const Pose& eef_init,
                            double grasp_radius) {
  if (primitives.empty()) throw TaskError("task script is empty");
  Composer c{scene, eef_init, grasp_radius};
  for (const auto& p : primitives) c.apply(p);
  for (const auto& step : c.out.steps) {
    for (const auto& w : step.waypoints) c.out.plan.waypoints.push_back(w);
  }
  if (c.out.plan.waypoints.front().phase != Phase::kApproach) {
    throw TaskError("task script must begin in the approach phase");
  }
  return c.out;
}

}  // namespace mobgen
