// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Rigid-body pose algebra on SE(3): composition, inversion, exponential and
// logarithm maps, interpolation and pose error.

#pragma once

#include <array>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mobgen {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Thrown by log_map when the rotation angle is too close to pi for the
/// rotation axis to be well defined.
class NearSingularLog : public std::domain_error {
 public:
  explicit NearSingularLog(double angle);
  double angle() const { return angle_; }

 private:
  double angle_;
};

/// Element of se(3). The angular part is an axis-angle vector; the linear
/// part is the translational velocity component, not the translation.
struct Twist {
  Vec3 angular = Vec3::Zero();
  Vec3 linear = Vec3::Zero();
};

/// Rigid transform. The quaternion is kept unit-norm with w >= 0 so that
/// equal rotations compare equal coefficient-wise.
class Pose {
 public:
  Pose() = default;
  Pose(const Quat& rotation, const Vec3& translation);
  Pose(const Mat3& rotation, const Vec3& translation);

  static Pose Identity() { return Pose(); }
  static Pose Translation(const Vec3& t) { return Pose(Quat::Identity(), t); }
  static Pose Rotation(const Quat& q) { return Pose(q, Vec3::Zero()); }
  static Pose AxisAngle(const Vec3& axis, double angle);
  /// Pose of a planar base at (x, y) with heading yaw about world z.
  static Pose Planar(double x, double y, double yaw);

  const Quat& rotation() const { return q_; }
  const Vec3& translation() const { return t_; }
  Mat3 rotation_matrix() const { return q_.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  Pose operator*(const Pose& other) const;
  Vec3 operator*(const Vec3& point) const { return q_ * point + t_; }
  Pose inverse() const;

  /// Rotation angle in [0, pi].
  double angle() const;

  /// Layout used by every binary format: (w, x, y, z, tx, ty, tz).
  std::array<float, 7> to_floats() const;
  static Pose FromFloats(const std::array<float, 7>& v);

 private:
  Quat q_ = Quat::Identity();
  Vec3 t_ = Vec3::Zero();
};

inline Pose compose(const Pose& a, const Pose& b) { return a * b; }
inline Pose inverse(const Pose& p) { return p.inverse(); }

Mat3 skew(const Vec3& v);

/// Axis-angle logarithm of a unit quaternion. Well defined for all inputs;
/// the axis is arbitrary at exactly pi.
Vec3 rotation_log(const Quat& q);
Quat rotation_exp(const Vec3& w);

Twist log_map(const Pose& p);
Pose exp_map(const Twist& xi);

/// Geodesic interpolation: a * exp(alpha * log(a^-1 b)).
Pose interpolate(const Pose& a, const Pose& b, double alpha);

struct PoseError {
  double position = 0.0;  // meters
  double rotation = 0.0;  // radians
};

/// pos = |t_a - t_b|, rot = |Log(R_a^T R_b)|.
PoseError pose_error(const Pose& a, const Pose& b);

/// Max of translation norm and rotation angle of a^-1 b; used by tests and
/// invariants that compare poses with a single tolerance.
double pose_distance(const Pose& a, const Pose& b);

}  // namespace mobgen
