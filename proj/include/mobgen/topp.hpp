// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Time-optimal path parameterization by reachability analysis. For each grid
// point the admissible (s_dd, s_d^2) pairs are cut out by per-joint linear
// acceleration constraints q'' s_d^2 + q' s_dd in [-a_max, a_max] and the
// velocity bound; a backward pass builds the controllable sets from the
// terminal rest condition and a forward pass greedily picks the largest
// reachable s_d^2.

#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "mobgen/robot_model.hpp"

namespace mobgen {

class DegeneratePath : public std::invalid_argument {
 public:
  DegeneratePath() : std::invalid_argument("topp: path has zero length") {}
};

class InfeasiblePath : public std::runtime_error {
 public:
  explicit InfeasiblePath(int index);
  int index() const { return index_; }

 private:
  int index_;
};

struct GeometricPath {
  Eigen::VectorXd grid;  // s values in [0, 1]
  Eigen::MatrixXd q;     // N x dofs
  Eigen::MatrixXd dq;    // dq/ds
  Eigen::MatrixXd ddq;   // d2q/ds2

  int size() const { return static_cast<int>(grid.size()); }
  int dofs() const { return static_cast<int>(q.cols()); }
  void validate() const;

  /// Uniform s-grid over the waypoints; derivatives by central finite
  /// differences (one-sided at the ends).
  static GeometricPath FromWaypoints(const Eigen::MatrixXd& waypoints);
  static GeometricPath FromWaypoints(const std::vector<Configuration>& wps);
  /// Catmull-Rom resampling of the waypoints to n grid points, then
  /// FromWaypoints.
  static GeometricPath Resampled(const std::vector<Configuration>& wps, int n);
};

enum class Boundary { kRestToRest };

struct TimedTrajectory {
  std::vector<double> times;
  Eigen::MatrixXd q;   // N x dofs
  Eigen::MatrixXd qd;  // N x dofs
  Eigen::VectorXd sd;  // path velocity per grid point

  double duration() const { return times.empty() ? 0.0 : times.back(); }
};

/// Controllable interval of s_d^2 at every grid point (diagnostics/tests).
struct ControllableSets {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

ControllableSets controllable_sets(const GeometricPath& path,
                                   const Eigen::VectorXd& v_max,
                                   const Eigen::VectorXd& a_max);

TimedTrajectory retime(const GeometricPath& path, const Eigen::VectorXd& v_max,
                       const Eigen::VectorXd& a_max,
                       Boundary boundary = Boundary::kRestToRest);

struct TimedSample {
  double t = 0.0;
  Configuration q;
  Eigen::VectorXd qd;
};

/// Samples at t = 0, dt, 2 dt, ... and always at the terminal time, linearly
/// interpolating grid values in time.
std::vector<TimedSample> sample_timed(const TimedTrajectory& traj, double dt);

}  // namespace mobgen
