// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
#include "mobgen/wholebody_opt.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "mobgen/action_synthesis.hpp"
#include "mobgen/scene.hpp"
#include "test_util.hpp"

namespace mobgen {
namespace {

using testing::planar_arm;
using testing::random_config;
using testing::random_pose;

PlanRequest request(const RobotModel& m, const Eigen::VectorXd& x0,
                    const Pose& goal, int T = 10) {
  PlanRequest r;
  r.model = &m;
  r.x_init = x0;
  r.goal = goal;
  r.T = T;
  return r;
}

Eigen::VectorXd home() {
  Eigen::VectorXd q(6);
  q << 0, 0, 0, 0.3, 0.6, -0.6;
  return q;
}

TEST(Cost, ZeroAtGoalWithoutBaseTerms) {
  const RobotModel m = planar_arm();
  const Eigen::VectorXd q = home();
  PlanRequest r = request(m, q, m.forward_kinematics(q), 1);
  r.weights.w_yaw = 0.0;
  const TrajectoryMatrix x = q.transpose();
  EXPECT_NEAR(total_cost(x, r), 0.0, 1e-12);
}

TEST(Cost, IdenticalWaypointsHaveNoSmoothnessCost) {
  const RobotModel m = planar_arm();
  const Eigen::VectorXd q = home();
  const PlanRequest r = request(m, q, Pose(), 2);
  TrajectoryMatrix x(2, 6);
  x.row(0) = q.transpose();
  x.row(1) = q.transpose();
  EXPECT_EQ(cost_terms(x, r).smooth, 0.0);
}

TEST(Cost, GradientMatchesCentralDifferences) {
  const RobotModel m = planar_arm();
  CounterRng rng(31, 0, Stream::kTest);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd q = random_config(m, rng, 0.3);
    PlanRequest r = request(m, q, random_pose(rng, 2.0, 1.0), 6);
    r.obstacles.push_back({Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.25), 0.4});
    r.weights.yaw_ref = 0.2;
    TrajectoryMatrix x(r.T, m.dofs());
    for (int t = 0; t < r.T; ++t) x.row(t) = random_config(m, rng, 0.3).transpose();
    const TrajectoryMatrix g = cost_gradient(x, r);
    TrajectoryMatrix fd(x.rows(), x.cols());
    const double h = 1e-6;
    for (int i = 0; i < x.size(); ++i) {
      TrajectoryMatrix xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      fd(i) = (total_cost(xp, r) - total_cost(xm, r)) / (2 * h);
    }
    worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff() /
                                std::max(1.0, fd.cwiseAbs().maxCoeff()));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Plan, GoalAtStartConvergesImmediately) {
  const RobotModel m = planar_arm();
  const Eigen::VectorXd q = home();
  const WholeBodyTrajectory w = plan(request(m, q, m.forward_kinematics(q)));
  EXPECT_TRUE(w.converged);
  ASSERT_EQ(w.waypoints.size(), 10u);
  for (const auto& wp : w.waypoints) EXPECT_LT((wp - q).norm(), 1e-6);
}

TEST(Plan, GoalAheadMeetsContract) {
  const RobotModel m = planar_arm();
  const Eigen::VectorXd q = home();
  const Pose goal = Pose::Translation(Vec3(0.5, 0, 0)) * m.forward_kinematics(q);
  const WholeBodyTrajectory w = plan(request(m, q, goal));
  ASSERT_TRUE(w.converged);
  EXPECT_LE(w.terminal_error.position, 5e-3);
  EXPECT_LE(w.terminal_error.rotation, 0.02);
  EXPECT_LT((w.waypoints.front() - q).norm(), 1e-15);
  for (const auto& wp : w.waypoints) EXPECT_TRUE(m.within_limits(wp, 1e-12));
  for (std::size_t i = 1; i < w.cost_history.size(); ++i) {
    EXPECT_LE(w.cost_history[i], w.cost_history[i - 1] + 1e-12);
  }
}

TEST(Plan, KeepsClearOfObstacleOnBasePath) {
  const RobotModel m = planar_arm();
  const Eigen::VectorXd q = home();
  const Pose goal = Pose::Translation(Vec3(1.5, 0, 0)) * m.forward_kinematics(q);
  PlanRequest r = request(m, q, goal, 15);
  r.obstacles.push_back({Vec3(0.8, 0.05, 0.25), 0.15});
  const WholeBodyTrajectory w = plan(r);
  ASSERT_TRUE(w.converged);
  const double d_safe = r.weights.d_safe;
  for (const auto& wp : w.waypoints) {
    const auto frames = m.link_frames(wp);
    for (const Vec3& c : m.sphere_centers(frames)) {
      const double gap = (c - r.obstacles[0].center).norm() - 0.3 - r.obstacles[0].radius;
      EXPECT_GE(gap, d_safe - 1e-3);
    }
  }
  EXPECT_GE(w.min_clearance, d_safe - 1e-3);
}

TEST(Plan, ArmOnlyOutOfReachDoesNotConverge) {
  const RobotModel m = planar_arm();
  const Eigen::VectorXd q = home();
  PlanRequest r = request(m, q, Pose::Translation(Vec3(3, 0, 0)) * m.forward_kinematics(q));
  r.mode = JointGroup::kArmOnly;
  const WholeBodyTrajectory w = plan(r);
  EXPECT_FALSE(w.converged);
  for (const auto& wp : w.waypoints) EXPECT_EQ(wp.head<3>(), q.head<3>());
}

TEST(Track, SingleWaypointAtStart) {
  const RobotModel m = planar_arm();
  const Eigen::VectorXd q = home();
  const PlanRequest settings = request(m, q, Pose());
  const WholeBodyTrajectory w =
      track_eef_waypoints(m, q, {m.forward_kinematics(q)}, settings);
  EXPECT_TRUE(w.converged);
  for (const auto& wp : w.waypoints) EXPECT_LT((wp - q).norm(), 1e-6);
}

TEST(Track, DrawerSweepKeepsGraspRigid) {
  const RobotModel m = planar_arm();
  const Eigen::VectorXd q = home();
  ArticulatedObject d;
  d.name = "drawer";
  d.joint.kind = JointKind::kPrismatic;
  d.joint.axis = Vec3::UnitX();
  d.joint.min = 0.0;
  d.joint.max = 0.4;
  const Pose eef0 = m.forward_kinematics(q);
  d.base_pose = Pose(Quat(Eigen::AngleAxisd(M_PI, Vec3::UnitZ())),
                     eef0.translation());
  d.handle_grasp = d.base_pose.inverse() * eef0;
  const auto poses = vkc_eef_trajectory(d, eef0, 0.0, 0.3, 20);
  PlanRequest settings = request(m, q, Pose(), 6);
  const WholeBodyTrajectory w = track_eef_waypoints(m, q, poses, settings);
  ASSERT_TRUE(w.converged);
  const Pose rel0 = link_pose(d, 0.0).inverse() * eef0;
  // Segment k ends on waypoint k: every (T - 1)-th row is a tracked pose.
  const int per = settings.T - 1;
  ASSERT_EQ(static_cast<int>(w.waypoints.size()), 1 + per * 20);
  for (int k = 0; k < 20; ++k) {
    const Pose got = m.forward_kinematics(w.waypoints[(k + 1) * per]);
    const PoseError e = pose_error(got, poses[k]);
    EXPECT_LE(e.position, 5e-3) << k;
    EXPECT_LE(e.rotation, 0.02) << k;
    const double th = 0.3 * k / 19.0;
    const PoseError rigid = pose_error(link_pose(d, th).inverse() * got, rel0);
    EXPECT_LE(rigid.position, 5e-3) << k;
  }
}

TEST(Track, UnreachableArmOnlyWaypointFails) {
  const RobotModel m = planar_arm();
  const Eigen::VectorXd q = home();
  PlanRequest settings = request(m, q, Pose());
  settings.mode = JointGroup::kArmOnly;
  const Pose far = Pose::Translation(Vec3(2.5, 0, 0)) * m.forward_kinematics(q);
  EXPECT_FALSE(track_eef_waypoints(m, q, {far}, settings).converged);
}

}  // namespace
}  // namespace mobgen
