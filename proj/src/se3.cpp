// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "mobgen/se3.hpp"

#include <cmath>
#include <string>

namespace mobgen {
namespace {

constexpr double kSmallAngle = 1e-4;
constexpr double kSingularMargin = 1e-6;

Quat canonical(Quat q) {
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

// Left Jacobian V(w) of SO(3) and its inverse, with Taylor branches below
// kSmallAngle.
Mat3 left_jacobian(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 W = skew(w);
  double a, b;
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    a = 0.5 - t2 / 24.0;
    b = 1.0 / 6.0 - t2 / 120.0;
  } else {
    const double t2 = theta * theta;
    a = (1.0 - std::cos(theta)) / t2;
    b = (theta - std::sin(theta)) / (t2 * theta);
  }
  return Mat3::Identity() + a * W + b * W * W;
}

Mat3 left_jacobian_inverse(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 W = skew(w);
  double c;
  if (theta < kSmallAngle) {
    c = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    c = (1.0 - theta * std::sin(theta) / (2.0 * (1.0 - std::cos(theta)))) /
        (theta * theta);
  }
  return Mat3::Identity() - 0.5 * W + c * W * W;
}

}  // namespace

NearSingularLog::NearSingularLog(double angle)
    : std::domain_error("log_map: rotation angle " + std::to_string(angle) +
                        " is within " + std::to_string(kSingularMargin) +
                        " of pi"),
      angle_(angle) {}

Pose::Pose(const Quat& rotation, const Vec3& translation)
    : q_(canonical(rotation)), t_(translation) {}

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : q_(canonical(Quat(rotation))), t_(translation) {}

Pose Pose::AxisAngle(const Vec3& axis, double angle) {
  return Pose(Quat(Eigen::AngleAxisd(angle, axis.normalized())), Vec3::Zero());
}

Pose Pose::Planar(double x, double y, double yaw) {
  return Pose(Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ())), Vec3(x, y, 0.0));
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_matrix();
  m.topRightCorner<3, 1>() = t_;
  return m;
}

Pose Pose::operator*(const Pose& other) const {
  return Pose(q_ * other.q_, q_ * other.t_ + t_);
}

Pose Pose::inverse() const {
  const Quat qi = q_.conjugate();
  return Pose(qi, -(qi * t_));
}

double Pose::angle() const {
  return 2.0 * std::atan2(q_.vec().norm(), std::abs(q_.w()));
}

std::array<float, 7> Pose::to_floats() const {
  return {static_cast<float>(q_.w()), static_cast<float>(q_.x()),
          static_cast<float>(q_.y()), static_cast<float>(q_.z()),
          static_cast<float>(t_.x()), static_cast<float>(t_.y()),
          static_cast<float>(t_.z())};
}

Pose Pose::FromFloats(const std::array<float, 7>& v) {
  return Pose(Quat(v[0], v[1], v[2], v[3]), Vec3(v[4], v[5], v[6]));
}

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return S;
}

Vec3 rotation_log(const Quat& q_in) {
  const Quat q = canonical(q_in);
  const double s = q.vec().norm();
  const double theta = 2.0 * std::atan2(s, q.w());
  if (theta < kSmallAngle) {
    // theta / sin(theta/2) ~ 2 (1 + theta^2 / 24)
    return 2.0 * (1.0 + theta * theta / 24.0) * q.vec();
  }
  return theta / s * q.vec();
}

Quat rotation_exp(const Vec3& w) {
  const double theta = w.norm();
  if (theta < kSmallAngle) {
    const double half = 0.5 - theta * theta / 48.0;  // sin(t/2)/t
    Quat q(1.0 - theta * theta / 8.0, half * w.x(), half * w.y(),
           half * w.z());
    return q.normalized();
  }
  return Quat(Eigen::AngleAxisd(theta, w / theta));
}

Twist log_map(const Pose& p) {
  const double theta = p.angle();
  if (theta >= M_PI - kSingularMargin) throw NearSingularLog(theta);
  Twist xi;
  xi.angular = rotation_log(p.rotation());
  xi.linear = left_jacobian_inverse(xi.angular) * p.translation();
  return xi;
}

Pose exp_map(const Twist& xi) {
  return Pose(rotation_exp(xi.angular), left_jacobian(xi.angular) * xi.linear);
}

Pose interpolate(const Pose& a, const Pose& b, double alpha) {
  Twist d = log_map(a.inverse() * b);
  d.angular *= alpha;
  d.linear *= alpha;
  return a * exp_map(d);
}

PoseError pose_error(const Pose& a, const Pose& b) {
  PoseError e;
  e.position = (a.translation() - b.translation()).norm();
  e.rotation = rotation_log(a.rotation().conjugate() * b.rotation()).norm();
  return e;
}

double pose_distance(const Pose& a, const Pose& b) {
  const Pose d = a.inverse() * b;
  return std::max(d.translation().norm(), d.angle());
}

}  // namespace mobgen
