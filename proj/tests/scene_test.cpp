// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
#include "mobgen/scene.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "mobgen/errors.hpp"
#include "test_util.hpp"

namespace mobgen {
namespace {

ArticulatedObject drawer() {
  ArticulatedObject d;
  d.name = "drawer";
  d.base_pose = Pose(Quat(Eigen::AngleAxisd(0.4, Vec3::UnitZ())), Vec3(1, 0.5, 0.7));
  d.joint.name = "slide";
  d.joint.kind = JointKind::kPrismatic;
  d.joint.axis = Vec3::UnitX();
  d.joint.min = 0.0;
  d.joint.max = 0.5;
  d.link_origin = Pose::Translation(Vec3(0.05, 0, 0));
  d.handle_grasp = Pose::Translation(Vec3(0.03, 0, 0));
  return d;
}

ArticulatedObject hinge() {
  ArticulatedObject h;
  h.name = "door";
  h.base_pose = Pose::Translation(Vec3(2, 1, 0));
  h.joint.name = "hinge";
  h.joint.kind = JointKind::kRevolute;
  h.joint.axis = Vec3::UnitZ();
  h.joint.min = -2.0;
  h.joint.max = 2.0;
  h.link_origin = Pose::Translation(Vec3(1, 0, 0));
  return h;
}

TEST(LinkPose, ZeroIsBaseThenOrigin) {
  const ArticulatedObject d = drawer();
  EXPECT_LT(pose_distance(link_pose(d, 0.0), d.base_pose * d.link_origin), 1e-15);
}

TEST(LinkPose, PrismaticClosedForm) {
  const ArticulatedObject d = drawer();
  const Pose rel = d.base_pose.inverse() * link_pose(d, 0.3);
  EXPECT_LT((rel.translation() - Vec3(0.35, 0, 0)).norm(), 1e-12);
  EXPECT_LT(rel.angle(), 1e-12);
}

TEST(LinkPose, RevoluteClosedForm) {
  const ArticulatedObject h = hinge();
  const Pose rel = h.base_pose.inverse() * link_pose(h, M_PI / 2);
  EXPECT_LT((rel.translation() - Vec3(0, 1, 0)).norm(), 1e-12);
}

TEST(LinkPose, GraspFollowsLink) {
  const ArticulatedObject d = drawer();
  EXPECT_LT(pose_distance(world_grasp(d, 0.2), link_pose(d, 0.2) * d.handle_grasp),
            1e-15);
}

SceneTemplate two_objects() {
  SceneTemplate t;
  t.robot = Eigen::VectorXd::Zero(6);
  t.articulated.push_back(drawer());
  RigidObject mug;
  mug.name = "mug";
  mug.pose = Pose::Translation(Vec3(0.8, -0.3, 0.75));
  mug.functional_axis = FunctionalAxis{Vec3(0, 0, -0.05), -Vec3::UnitZ()};
  t.rigid.push_back(mug);
  RigidObject bin;
  bin.name = "bin";
  bin.pose = Pose::Translation(Vec3(0.2, -0.9, 0.6));
  bin.functional_axis = FunctionalAxis{Vec3::Zero(), Vec3::UnitZ()};
  t.rigid.push_back(bin);
  return t;
}

ResetSpec wide_spec() {
  ResetSpec s;
  s.position_min = Vec3(-0.2, -0.1, 0);
  s.position_max = Vec3(0.2, 0.3, 0);
  s.yaw_min = -0.5;
  s.yaw_max = 0.5;
  s.scale_min = 0.9;
  s.scale_max = 1.1;
  s.arm_min = Eigen::Vector3d(-1, -1, -1);
  s.arm_max = Eigen::Vector3d(1, 1, 1);
  s.seed = 42;
  return s;
}

TEST(Reset, DegenerateRangesGiveTemplate) {
  const SceneTemplate t = two_objects();
  ResetSpec s;
  s.seed = 9;
  const SceneState st = reset_episode(t, s, 5);
  EXPECT_LT(pose_distance(st.articulated[0].base_pose, t.articulated[0].base_pose), 1e-15);
  EXPECT_LT(pose_distance(st.rigid[0].pose, t.rigid[0].pose), 1e-15);
  EXPECT_EQ(st.robot, t.robot);
}

TEST(Reset, Deterministic) {
  const SceneTemplate t = two_objects();
  const ResetSpec s = wide_spec();
  const SceneState a = reset_episode(t, s, 17), b = reset_episode(t, s, 17);
  EXPECT_EQ(a.robot, b.robot);
  ASSERT_EQ(a.draws.size(), b.draws.size());
  for (std::size_t i = 0; i < a.draws.size(); ++i) {
    EXPECT_EQ(a.draws[i].offset, b.draws[i].offset);
    EXPECT_EQ(a.draws[i].yaw, b.draws[i].yaw);
    EXPECT_EQ(a.draws[i].scale, b.draws[i].scale);
  }
  const SceneState c = reset_episode(t, s, 18);
  EXPECT_NE(a.draws[0].offset, c.draws[0].offset);
}

TEST(Reset, DrawsStayInRange) {
  const SceneTemplate t = two_objects();
  const ResetSpec s = wide_spec();
  for (int e = 0; e < 200; ++e) {
    const SceneState st = reset_episode(t, s, e);
    for (const auto& d : st.draws) {
      EXPECT_TRUE((d.offset.array() >= s.position_min.array()).all());
      EXPECT_TRUE((d.offset.array() <= s.position_max.array()).all());
      EXPECT_GE(d.yaw, s.yaw_min);
      EXPECT_LE(d.yaw, s.yaw_max);
      EXPECT_GE(d.scale, s.scale_min);
      EXPECT_LE(d.scale, s.scale_max);
    }
    EXPECT_EQ(st.robot.head<3>(), Eigen::Vector3d::Zero());
    EXPECT_LE(st.robot.tail<3>().cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Reset, UniformMeanOfPositionOffset) {
  SceneTemplate t;
  t.robot = Eigen::VectorXd::Zero(6);
  RigidObject o;
  o.name = "o";
  t.rigid.push_back(o);
  ResetSpec s;
  s.position_min = Vec3(-1, 0, 0);
  s.position_max = Vec3(3, 0, 0);
  s.seed = 3;
  double sum = 0.0;
  const int n = 10000;
  for (int e = 0; e < n; ++e) sum += reset_episode(t, s, e).draws[0].offset.x();
  // Midpoint 1.0, range 4: 1% of the range.
  EXPECT_NEAR(sum / n, 1.0, 0.04);
}

TEST(Reset, InvalidSpecRejected) {
  const SceneTemplate t = two_objects();
  ResetSpec s;
  s.yaw_min = 1.0;
  s.yaw_max = 0.0;
  EXPECT_THROW(reset_episode(t, s, 0), ConfigError);
  s = ResetSpec();
  s.arm_min = Eigen::Vector2d(0, 0);
  s.arm_max = Eigen::Vector2d(1, 1);
  EXPECT_THROW(reset_episode(t, s, 0), ConfigError);
}

TEST(Success, Predicates) {
  SceneTemplate t = two_objects();
  t.rigid[1].pose = t.rigid[0].pose;
  t.rigid[1].functional_axis->point = t.rigid[0].functional_axis->point;
  SceneState st = reset_episode(t, ResetSpec(), 0);

  SuccessPredicate dist;
  dist.kind = SuccessKind::kDistance;
  dist.object = "mug";
  dist.target = "bin";
  EXPECT_TRUE(check_success(st, dist));

  SuccessPredicate ang;
  ang.kind = SuccessKind::kJointAngle;
  ang.object = "drawer";
  ang.target_joint_value = 0.30;
  ang.threshold = 0.02;
  st.articulated[0].joint_value = 0.29;
  EXPECT_TRUE(check_success(st, ang));
  st.articulated[0].joint_value = 0.0;
  ang.target_joint_value = 0.5;
  EXPECT_FALSE(check_success(st, ang));
}

TEST(Scene, ParentedObjectResolvesThroughParent) {
  SceneTemplate t;
  t.robot = Eigen::VectorXd::Zero(6);
  t.articulated.push_back(hinge());
  ArticulatedObject lever = drawer();
  lever.name = "lever";
  lever.base_pose = Pose::Translation(Vec3(0.5, 0, 1));
  lever.parent = 0;
  t.articulated.push_back(lever);
  SceneState st = reset_episode(t, ResetSpec(), 0);
  st.articulated[0].joint_value = 0.7;
  const Pose expected = link_pose(st.articulated[0], 0.7) * lever.base_pose;
  EXPECT_LT(pose_distance(st.world_base(1), expected), 1e-12);
  EXPECT_LT(pose_distance(st.world_link(1),
                          expected * lever.joint.transform(0.0) * lever.link_origin),
            1e-12);
}

}  // namespace
}  // namespace mobgen
