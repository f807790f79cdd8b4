// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "yaml_util.hpp"

namespace mobgen::yaml {

YAML::Node parse(const std::string& text, const std::string& what) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

std::vector<double> doubles(const YAML::Node& node, const std::string& ctx) {
  if (!node || !node.IsSequence()) throw ConfigError(ctx + ": expected a list");
  std::vector<double> out;
  try {
    for (const auto& v : node) out.push_back(v.as<double>());
  } catch (const YAML::Exception& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
  return out;
}

Vec3 vec3(const YAML::Node& node, const std::string& ctx) {
  const auto v = doubles(node, ctx);
  if (v.size() != 3) throw ConfigError(ctx + ": expected 3 numbers");
  return {v[0], v[1], v[2]};
}

Pose pose(const YAML::Node& node, const std::string& ctx) {
  if (!node) return Pose();
  if (!node.IsMap()) throw ConfigError(ctx + ": pose must be a map");
  Vec3 t = Vec3::Zero();
  if (node["translation"]) t = vec3(node["translation"], ctx + ".translation");
  Quat q = Quat::Identity();
  if (node["rotation"] && node["rpy"]) {
    throw ConfigError(ctx + ": give either rotation or rpy, not both");
  }
  if (node["rotation"]) {
    const auto r = doubles(node["rotation"], ctx + ".rotation");
    if (r.size() != 4) throw ConfigError(ctx + ".rotation: expected w,x,y,z");
    q = Quat(r[0], r[1], r[2], r[3]);
    if (q.norm() < 1e-12) throw ConfigError(ctx + ".rotation: zero quaternion");
  } else if (node["rpy"]) {
    const Vec3 rpy = vec3(node["rpy"], ctx + ".rpy");
    q = Quat(Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
             Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
             Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()));
  }
  return Pose(q, t);
}

void emit_vec3(YAML::Emitter& out, const Vec3& v) {
  out << YAML::Flow << YAML::BeginSeq << v.x() << v.y() << v.z()
      << YAML::EndSeq;
}

void emit_pose(YAML::Emitter& out, const Pose& p) {
  const Quat& q = p.rotation();
  out << YAML::BeginMap << YAML::Key << "translation" << YAML::Value;
  emit_vec3(out, p.translation());
  out << YAML::Key << "rotation" << YAML::Value << YAML::Flow
      << YAML::BeginSeq << q.w() << q.x() << q.y() << q.z() << YAML::EndSeq
      << YAML::EndMap;
}

}  // namespace mobgen::yaml
