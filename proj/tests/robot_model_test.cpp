// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
#include "mobgen/robot_model.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "mobgen/errors.hpp"
#include "test_util.hpp"

namespace mobgen {
namespace {

using testing::make_joint;
using testing::planar_arm;
using testing::planar_arm_position;
using testing::random_config;

constexpr double kDeg = M_PI / 180.0;

TEST(ForwardKinematics, IdentityOriginsGiveEefOffset) {
  std::vector<JointSpec> j = {
      make_joint("x", JointKind::kPlanarX, Vec3::Zero(), -1, 1),
      make_joint("y", JointKind::kPlanarY, Vec3::Zero(), -1, 1),
      make_joint("yaw", JointKind::kPlanarYaw, Vec3::Zero(), -3, 3),
      make_joint("a", JointKind::kRevolute, Vec3::Zero(), -3, 3)};
  const Pose off(Quat(Eigen::AngleAxisd(0.3, Vec3::UnitY())), Vec3(0.1, 0.2, 0.3));
  const RobotModel m(j, off);
  EXPECT_LT(pose_distance(m.forward_kinematics(Eigen::VectorXd::Zero(4)), off),
            1e-12);
}

TEST(ForwardKinematics, BaseTranslation) {
  const RobotModel m = planar_arm();
  Eigen::VectorXd q = Eigen::VectorXd::Zero(6);
  const Pose p0 = m.forward_kinematics(q);
  q[0] = 1.0;
  q[1] = 2.0;
  const Pose p1 = m.forward_kinematics(q);
  EXPECT_LT((p1.translation() - p0.translation() - Vec3(1, 2, 0)).norm(), 1e-12);
  EXPECT_LT(p1.rotation().angularDistance(p0.rotation()), 1e-12);
}

TEST(ForwardKinematics, PlanarArmMatchesTrigOracle) {
  const RobotModel m = planar_arm();
  Eigen::VectorXd q(6);
  q << 0, 0, 0, 30 * kDeg, 45 * kDeg, -15 * kDeg;
  EXPECT_LT((m.forward_kinematics(q).translation() - planar_arm_position(q)).norm(),
            1e-12);
  CounterRng rng(11, 0, Stream::kTest);
  for (int i = 0; i < 200; ++i) {
    q = random_config(m, rng);
    const Pose p = m.forward_kinematics(q);
    EXPECT_LT((p.translation() - planar_arm_position(q)).norm(), 1e-12);
    // Planar chain: end-effector heading is the sum of the yaw angles.
    const double heading = q[2] + q[3] + q[4] + q[5];
    const Quat expected(Eigen::AngleAxisd(heading, Vec3::UnitZ()));
    EXPECT_LT(p.rotation().angularDistance(expected), 1e-9);
  }
}

TEST(ForwardKinematics, DimensionMismatch) {
  const RobotModel m = planar_arm();
  EXPECT_THROW(m.forward_kinematics(Eigen::VectorXd::Zero(5)), DimensionMismatch);
}

TEST(Jacobian, RevoluteAtUnitRadius) {
  std::vector<JointSpec> j = {
      make_joint("x", JointKind::kPlanarX, Vec3::Zero(), -1, 1),
      make_joint("y", JointKind::kPlanarY, Vec3::Zero(), -1, 1),
      make_joint("yaw", JointKind::kPlanarYaw, Vec3::Zero(), -3, 3),
      make_joint("a", JointKind::kRevolute, Vec3::Zero(), -3, 3)};
  const RobotModel m(j, Pose::Translation(Vec3(1, 0, 0)));
  const Jacobian J = m.jacobian(Eigen::VectorXd::Zero(4));
  EXPECT_NEAR(J.col(3).tail<3>().norm(), 1.0, 1e-12);
  EXPECT_LT((J.col(3).tail<3>() - Vec3(0, 1, 0)).norm(), 1e-12);
}

TEST(Jacobian, PrismaticColumn) {
  std::vector<JointSpec> j = {
      make_joint("x", JointKind::kPlanarX, Vec3::Zero(), -1, 1),
      make_joint("y", JointKind::kPlanarY, Vec3::Zero(), -1, 1),
      make_joint("yaw", JointKind::kPlanarYaw, Vec3::Zero(), -3, 3),
      make_joint("lift", JointKind::kPrismatic, Vec3(0.1, 0, 0.3), 0, 1,
                 Vec3(0, 0, 1))};
  const RobotModel m(j, Pose::Translation(Vec3(0.5, 0, 0)));
  const Jacobian J = m.jacobian(Eigen::VectorXd::Zero(4));
  EXPECT_LT(J.col(3).head<3>().norm(), 1e-15);
  EXPECT_LT((J.col(3).tail<3>() - Vec3::UnitZ()).norm(), 1e-12);
}

TEST(Jacobian, MatchesCentralDifferences) {
  const RobotModel m = RobotModel::FromYaml(R"(
name: spatial
joints:
  - {name: x, kind: planar-x, limits: [-2, 2], v_max: 1, a_max: 1}
  - {name: y, kind: planar-y, limits: [-2, 2], v_max: 1, a_max: 1}
  - {name: yaw, kind: planar-yaw, limits: [-3, 3], v_max: 1, a_max: 1}
  - {name: lift, kind: prismatic, axis: [0, 0, 1], origin: {translation: [0.1, 0, 0.3]}, limits: [0, 0.8], v_max: 1, a_max: 1}
  - {name: a, kind: revolute, axis: [0, 0, 1], origin: {translation: [0, 0, 0.05]}, limits: [-3, 3], v_max: 1, a_max: 1}
  - {name: b, kind: revolute, axis: [0, 1, 0], origin: {translation: [0.35, 0, 0]}, limits: [-3, 3], v_max: 1, a_max: 1}
  - {name: c, kind: revolute, axis: [1, 0, 0], origin: {translation: [0.3, 0, 0], rpy: [0.2, 0, 0.4]}, limits: [-3, 3], v_max: 1, a_max: 1}
eef_offset: {translation: [0.08, 0, 0], rpy: [0, 1.5707963267948966, 0]}
)");
  CounterRng rng(12, 0, Stream::kTest);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd q = random_config(m, rng);
    const Jacobian J = m.jacobian(q);
    const Pose p0 = m.forward_kinematics(q);
    Jacobian fd(6, m.dofs());
    for (int i = 0; i < m.dofs(); ++i) {
      Eigen::VectorXd qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const Pose pp = m.forward_kinematics(qp), pm = m.forward_kinematics(qm);
      // World-frame angular velocity: Log(R(q+h) R(q-h)^T) / 2h.
      fd.col(i).head<3>() =
          rotation_log(pp.rotation() * pm.rotation().inverse()) / (2 * h);
      fd.col(i).tail<3>() = (pp.translation() - pm.translation()) / (2 * h);
    }
    (void)p0;
    const double rel = (J - fd).norm() / std::max(1.0, J.norm());
    EXPECT_LT(rel, 1e-5) << "trial " << trial;
  }
}

TEST(Limits, ClampAndWithin) {
  const RobotModel m = planar_arm();
  Eigen::VectorXd q = Eigen::VectorXd::Zero(6);
  q[3] = 3.0;
  EXPECT_FALSE(m.within_limits(q));
  const Eigen::VectorXd c = m.clamp(q);
  EXPECT_TRUE(m.within_limits(c));
  EXPECT_DOUBLE_EQ(c[3], 2.6);
}

TEST(Masks, Groups) {
  const RobotModel m = planar_arm();
  EXPECT_EQ(m.mask(JointGroup::kBaseOnly).sum(), 3.0);
  EXPECT_EQ(m.mask(JointGroup::kArmOnly).sum(), 3.0);
  EXPECT_EQ(m.mask(JointGroup::kWholeBody).sum(), 6.0);
  EXPECT_EQ(m.mask(JointGroup::kArmOnly)[0], 0.0);
}

TEST(RobotYaml, RoundTrip) {
  const RobotModel m = planar_arm();
  const RobotModel back = RobotModel::FromYaml(m.ToYaml());
  ASSERT_EQ(back.dofs(), m.dofs());
  CounterRng rng(13, 0, Stream::kTest);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd q = random_config(m, rng);
    EXPECT_LT(pose_distance(back.forward_kinematics(q), m.forward_kinematics(q)),
              1e-12);
  }
  EXPECT_EQ(back.collision_spheres().size(), 1u);
}

TEST(RobotYaml, RejectsBadInput) {
  EXPECT_THROW(RobotModel::FromYaml("joints: []"), ConfigError);
  EXPECT_THROW(RobotModel::FromYaml(R"(
joints:
  - {name: x, kind: planar-x, limits: [1, -1], v_max: 1, a_max: 1}
  - {name: y, kind: planar-y, limits: [-1, 1], v_max: 1, a_max: 1}
  - {name: yaw, kind: planar-yaw, limits: [-1, 1], v_max: 1, a_max: 1}
)"),
               ConfigError);
  EXPECT_THROW(RobotModel::FromYaml(R"(
joints:
  - {name: x, kind: hinge, limits: [-1, 1], v_max: 1, a_max: 1}
)"),
               ConfigError);
}

TEST(Ik, TargetAtSeedReturnsSeed) {
  const RobotModel m = planar_arm();
  Eigen::VectorXd q(6);
  q << 0.2, -0.1, 0.3, 0.4, -0.5, 0.6;
  const auto r = ik_damped_least_squares(m, m.forward_kinematics(q), q);
  ASSERT_TRUE(r.has_value());
  EXPECT_LT((*r - q).norm(), 1e-12);
}

TEST(Ik, ReachableOffsetConverges) {
  const RobotModel m = planar_arm();
  CounterRng rng(14, 0, Stream::kTest);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd q = random_config(m, rng, 0.5);
    const Pose p = m.forward_kinematics(q);
    const Pose target = Pose::Translation(Vec3(0.1 * std::cos(i), 0.1 * std::sin(i), 0)) * p;
    IkOptions opts;
    opts.max_iters = 100;
    opts.tol = 1e-4;
    const auto r = ik_damped_least_squares(m, target, q, opts);
    ASSERT_TRUE(r.has_value()) << i;
    const PoseError e = pose_error(m.forward_kinematics(*r), target);
    EXPECT_LT(std::max(e.position, e.rotation), 1e-4);
    EXPECT_TRUE(m.within_limits(*r));
  }
}

TEST(Ik, UnreachableWithFixedBaseFails) {
  const RobotModel m = planar_arm();
  const Eigen::VectorXd q = Eigen::VectorXd::Zero(6);
  const Pose target = Pose::Translation(Vec3(10, 0, 0)) * m.forward_kinematics(q);
  IkOptions opts;
  opts.group = JointGroup::kArmOnly;
  EXPECT_FALSE(ik_damped_least_squares(m, target, q, opts).has_value());
}

}  // namespace
}  // namespace mobgen
