// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "mobgen/robot_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "mobgen/errors.hpp"
#include "yaml_util.hpp"

namespace mobgen {

const char* to_string(JointKind kind) {
  switch (kind) {
    case JointKind::kRevolute: return "revolute";
    case JointKind::kPrismatic: return "prismatic";
    case JointKind::kPlanarX: return "planar-x";
    case JointKind::kPlanarY: return "planar-y";
    case JointKind::kPlanarYaw: return "planar-yaw";
  }
  return "?";
}

JointKind joint_kind_from_string(const std::string& s) {
  if (s == "revolute") return JointKind::kRevolute;
  if (s == "prismatic") return JointKind::kPrismatic;
  if (s == "planar-x") return JointKind::kPlanarX;
  if (s == "planar-y") return JointKind::kPlanarY;
  if (s == "planar-yaw") return JointKind::kPlanarYaw;
  throw ConfigError("unknown joint kind '" + s + "'");
}

bool is_rotational(JointKind kind) {
  return kind == JointKind::kRevolute || kind == JointKind::kPlanarYaw;
}

void JointSpec::validate() const {
  const std::string ctx = "joint '" + name + "'";
  if (!(min < max)) throw ConfigError(ctx + ": limits must satisfy min < max");
  if (!(v_max > 0.0)) throw ConfigError(ctx + ": v_max must be positive");
  if (!(a_max > 0.0)) throw ConfigError(ctx + ": a_max must be positive");
  if (std::abs(axis.norm() - 1.0) > 1e-9) {
    throw ConfigError(ctx + ": axis must be unit-norm");
  }
}

Pose JointSpec::transform(double q) const {
  if (is_rotational(kind)) {
    return origin * Pose(Quat(Eigen::AngleAxisd(q, axis)), Vec3::Zero());
  }
  return origin * Pose::Translation(q * axis);
}

RobotModel::RobotModel(std::vector<JointSpec> joints, Pose eef_offset,
                       std::vector<CollisionSphere> spheres, std::string name)
    : name_(std::move(name)),
      joints_(std::move(joints)),
      eef_offset_(eef_offset),
      spheres_(std::move(spheres)) {
  static const JointKind kBaseKinds[kBaseDofs] = {
      JointKind::kPlanarX, JointKind::kPlanarY, JointKind::kPlanarYaw};
  static const Vec3 kBaseAxes[kBaseDofs] = {Vec3::UnitX(), Vec3::UnitY(),
                                            Vec3::UnitZ()};
  if (static_cast<int>(joints_.size()) < kBaseDofs) {
    throw ConfigError("robot must start with planar-x, planar-y, planar-yaw");
  }
  for (int i = 0; i < dofs(); ++i) {
    JointSpec& j = joints_[i];
    if (i < kBaseDofs) {
      if (j.kind != kBaseKinds[i]) {
        throw ConfigError("joint " + std::to_string(i) + " must be " +
                          to_string(kBaseKinds[i]));
      }
      j.axis = kBaseAxes[i];
      j.origin = Pose();
    } else if (j.kind != JointKind::kRevolute &&
               j.kind != JointKind::kPrismatic) {
      throw ConfigError("arm joint '" + j.name +
                        "' must be revolute or prismatic");
    }
    j.validate();
  }
  for (const auto& s : spheres_) {
    if (s.link < 0 || s.link >= dofs()) {
      throw ConfigError("collision sphere references link " +
                        std::to_string(s.link) + " outside the chain");
    }
    if (!(s.radius > 0.0)) throw ConfigError("collision sphere radius <= 0");
  }
}

RobotModel RobotModel::FromYaml(const std::string& text) {
  const YAML::Node root = yaml::parse(text, "robot description");
  const std::string ctx = "robot";
  std::vector<JointSpec> joints;
  if (!root["joints"] || !root["joints"].IsSequence()) {
    throw ConfigError("robot: 'joints' list is required");
  }
  for (const auto& jn : root["joints"]) {
    JointSpec j;
    j.name = yaml::get<std::string>(jn, "name", ctx);
    const std::string jctx = "joint '" + j.name + "'";
    j.kind = joint_kind_from_string(yaml::get<std::string>(jn, "kind", jctx));
    if (jn["axis"]) j.axis = yaml::vec3(jn["axis"], jctx + ".axis");
    j.origin = yaml::pose(jn["origin"], jctx + ".origin");
    const auto lim = yaml::doubles(jn["limits"], jctx + ".limits");
    if (lim.size() != 2) throw ConfigError(jctx + ": limits need [min, max]");
    j.min = lim[0];
    j.max = lim[1];
    j.v_max = yaml::get<double>(jn, "v_max", jctx);
    j.a_max = yaml::get<double>(jn, "a_max", jctx);
    joints.push_back(j);
  }
  std::vector<CollisionSphere> spheres;
  if (root["collision_spheres"]) {
    for (const auto& sn : root["collision_spheres"]) {
      CollisionSphere s;
      s.link = yaml::get<int>(sn, "link", "collision sphere");
      s.center = yaml::vec3(sn["center"], "collision sphere center");
      s.radius = yaml::get<double>(sn, "radius", "collision sphere");
      spheres.push_back(s);
    }
  }
  return RobotModel(std::move(joints),
                    yaml::pose(root["eef_offset"], "robot.eef_offset"),
                    std::move(spheres),
                    yaml::get_or<std::string>(root, "name", "robot", ctx));
}

RobotModel RobotModel::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open robot description " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return FromYaml(ss.str());
}

std::string RobotModel::ToYaml() const {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << name_;
  out << YAML::Key << "joints" << YAML::Value << YAML::BeginSeq;
  for (const auto& j : joints_) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << j.name;
    out << YAML::Key << "kind" << YAML::Value << to_string(j.kind);
    out << YAML::Key << "axis" << YAML::Value;
    yaml::emit_vec3(out, j.axis);
    out << YAML::Key << "origin" << YAML::Value;
    yaml::emit_pose(out, j.origin);
    out << YAML::Key << "limits" << YAML::Value << YAML::Flow
        << YAML::BeginSeq << j.min << j.max << YAML::EndSeq;
    out << YAML::Key << "v_max" << YAML::Value << j.v_max;
    out << YAML::Key << "a_max" << YAML::Value << j.a_max;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "eef_offset" << YAML::Value;
  yaml::emit_pose(out, eef_offset_);
  out << YAML::Key << "collision_spheres" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : spheres_) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "link" << YAML::Value
        << s.link << YAML::Key << "center" << YAML::Value;
    yaml::emit_vec3(out, s.center);
    out << YAML::Key << "radius" << YAML::Value << s.radius << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

Eigen::VectorXd RobotModel::lower() const {
  Eigen::VectorXd v(dofs());
  for (int i = 0; i < dofs(); ++i) v[i] = joints_[i].min;
  return v;
}

Eigen::VectorXd RobotModel::upper() const {
  Eigen::VectorXd v(dofs());
  for (int i = 0; i < dofs(); ++i) v[i] = joints_[i].max;
  return v;
}

Eigen::VectorXd RobotModel::v_max() const {
  Eigen::VectorXd v(dofs());
  for (int i = 0; i < dofs(); ++i) v[i] = joints_[i].v_max;
  return v;
}

Eigen::VectorXd RobotModel::a_max() const {
  Eigen::VectorXd v(dofs());
  for (int i = 0; i < dofs(); ++i) v[i] = joints_[i].a_max;
  return v;
}

Eigen::VectorXd RobotModel::mask(JointGroup group) const {
  Eigen::VectorXd m = Eigen::VectorXd::Ones(dofs());
  if (group == JointGroup::kBaseOnly) m.tail(arm_dofs()).setZero();
  if (group == JointGroup::kArmOnly) m.head(kBaseDofs).setZero();
  return m;
}

void RobotModel::check_dims(const Configuration& q) const {
  if (q.size() != dofs()) {
    throw DimensionMismatch("configuration size", dofs(), q.size());
  }
}

bool RobotModel::within_limits(const Configuration& q, double tol) const {
  check_dims(q);
  for (int i = 0; i < dofs(); ++i) {
    if (q[i] < joints_[i].min - tol || q[i] > joints_[i].max + tol) {
      return false;
    }
  }
  return true;
}

Configuration RobotModel::clamp(const Configuration& q) const {
  check_dims(q);
  return q.cwiseMax(lower()).cwiseMin(upper());
}

std::vector<Pose> RobotModel::link_frames(const Configuration& q) const {
  check_dims(q);
  std::vector<Pose> frames;
  frames.reserve(dofs());
  Pose current;
  for (int i = 0; i < dofs(); ++i) {
    current = current * joints_[i].transform(q[i]);
    frames.push_back(current);
  }
  return frames;
}

Pose RobotModel::forward_kinematics(const Configuration& q) const {
  return link_frames(q).back() * eef_offset_;
}

Eigen::Matrix3Xd RobotModel::point_jacobian(const std::vector<Pose>& frames,
                                            int link,
                                            const Vec3& world_point) const {
  Eigen::Matrix3Xd J = Eigen::Matrix3Xd::Zero(3, dofs());
  for (int i = 0; i <= link; ++i) {
    // The joint axis lives in the frame before the motion; for a revolute
    // joint the motion does not move its own axis, and a prismatic joint
    // does not rotate, so the post-motion frame gives the same axis.
    const Vec3 axis = frames[i].rotation() * joints_[i].axis;
    if (is_rotational(joints_[i].kind)) {
      J.col(i) = axis.cross(world_point - frames[i].translation());
    } else {
      J.col(i) = axis;
    }
  }
  return J;
}

Jacobian RobotModel::jacobian(const Configuration& q) const {
  const auto frames = link_frames(q);
  const Vec3 p = (frames.back() * eef_offset_).translation();
  Jacobian J = Jacobian::Zero(6, dofs());
  J.bottomRows<3>() = point_jacobian(frames, dofs() - 1, p);
  for (int i = 0; i < dofs(); ++i) {
    if (is_rotational(joints_[i].kind)) {
      J.block<3, 1>(0, i) = frames[i].rotation() * joints_[i].axis;
    }
  }
  return J;
}

std::vector<Vec3> RobotModel::sphere_centers(
    const std::vector<Pose>& frames) const {
  std::vector<Vec3> out;
  out.reserve(spheres_.size());
  for (const auto& s : spheres_) out.push_back(frames[s.link] * s.center);
  return out;
}

std::optional<Configuration> ik_damped_least_squares(
    const RobotModel& model, const Pose& target, const Configuration& seed,
    const IkOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("ik: tol must be > 0");
  Configuration q = model.clamp(seed);
  const Eigen::VectorXd mask = model.mask(opts.group);
  const double lambda2 = opts.damping * opts.damping;
  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    const Pose current = model.forward_kinematics(q);
    const PoseError err = pose_error(current, target);
    if (err.position <= opts.tol && err.rotation <= opts.tol) return q;
    if (iter == opts.max_iters) break;

    Eigen::Matrix<double, 6, 1> e;
    e.head<3>() = target.rotation() *
                  rotation_log(target.rotation().conjugate() *
                               current.rotation()) * -1.0;
    e.tail<3>() = target.translation() - current.translation();
    Jacobian J = model.jacobian(q);
    for (int i = 0; i < model.dofs(); ++i) J.col(i) *= mask[i];
    const Eigen::Matrix<double, 6, 6> A =
        J * J.transpose() + lambda2 * Eigen::Matrix<double, 6, 6>::Identity();
    Eigen::VectorXd dq = J.transpose() * A.ldlt().solve(e);
    const double largest = dq.cwiseAbs().maxCoeff();
    if (largest > opts.max_step) dq *= opts.max_step / largest;
    q = model.clamp(q + dq);
  }
  return std::nullopt;
}

}  // namespace mobgen
