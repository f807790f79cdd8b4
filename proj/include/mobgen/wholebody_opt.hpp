// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Direct-transcription whole-body trajectory optimization. The decision
// variable is the waypoint matrix x[1..T]; x[1] is pinned to the start
// configuration and every waypoint is projected onto the joint box.
//
//   cost = w_pos |p(x_T) - p_goal|^2 + w_rot |Log(R(x_T)^T R_goal)|^2
//        + sum_t sum_j w_smooth_j (x_{t+1,j} - x_{t,j})^2
//        + sum_t w_yaw (yaw_t - yaw_ref)^2
//        + sum_t w_col sum_{robot sphere, obstacle} max(0, d_safe - dist)^2

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mobgen/robot_model.hpp"
#include "mobgen/se3.hpp"

namespace mobgen {

struct CostWeights {
  double w_pos = 1000.0;
  double w_rot = 100.0;
  /// Per-joint; empty means 4 for base joints and 1 for arm joints.
  Eigen::VectorXd w_smooth;
  double w_yaw = 1.0;
  double w_col = 1e4;
  double d_safe = 0.05;
  /// Defaults to the yaw of x_init.
  std::optional<double> yaw_ref;

  void validate(int dofs) const;
};

struct SphereObstacle {
  Vec3 center = Vec3::Zero();
  double radius = 0.1;
};

struct SolverOptions {
  int max_iters = 500;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double min_decrease = 1e-8;
  double pos_tol = 5e-3;
  double rot_tol = 0.02;
  double clearance_slack = 1e-3;
  bool ik_init = true;
};

struct PlanRequest {
  const RobotModel* model = nullptr;
  Configuration x_init;
  Pose goal;
  int T = 10;
  CostWeights weights;
  std::vector<SphereObstacle> obstacles;
  JointGroup mode = JointGroup::kWholeBody;
  SolverOptions solver;
};

/// Rows are waypoints, columns joints.
using TrajectoryMatrix = Eigen::MatrixXd;

struct WholeBodyTrajectory {
  std::vector<Configuration> waypoints;
  bool converged = false;
  double final_cost = 0.0;
  int iterations = 0;
  PoseError terminal_error;
  double min_clearance = 0.0;  // smallest sphere-to-obstacle surface gap
  std::vector<double> cost_history;  // cost after each accepted step

  TrajectoryMatrix matrix() const;
};

/// Individual cost terms, exposed for tests and diagnostics.
struct CostBreakdown {
  double terminal = 0.0;
  double smooth = 0.0;
  double yaw = 0.0;
  double collision = 0.0;
  double total() const { return terminal + smooth + yaw + collision; }
};

CostBreakdown cost_terms(const TrajectoryMatrix& x, const PlanRequest& req);
double total_cost(const TrajectoryMatrix& x, const PlanRequest& req);
/// Analytic gradient of total_cost with respect to every entry of x
/// (the pinned first row and frozen joints included; the solver masks them).
TrajectoryMatrix cost_gradient(const TrajectoryMatrix& x,
                               const PlanRequest& req);

/// Smallest signed sphere-to-obstacle distance (surface gap) over all
/// waypoints; +inf without obstacles or robot spheres.
double min_clearance(const TrajectoryMatrix& x, const PlanRequest& req);

WholeBodyTrajectory plan(const PlanRequest& req);

/// Chains plan() through a sequence of end-effector targets, each solution
/// seeding the next. The first waypoint of every later segment duplicates
/// the previous segment's last and is dropped.
WholeBodyTrajectory track_eef_waypoints(const RobotModel& model,
                                        const Configuration& x_init,
                                        const std::vector<Pose>& waypoints,
                                        const PlanRequest& settings);

}  // namespace mobgen
