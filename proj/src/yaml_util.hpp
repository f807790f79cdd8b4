// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "mobgen/errors.hpp"
#include "mobgen/se3.hpp"

namespace mobgen::yaml {

YAML::Node parse(const std::string& text, const std::string& what);

template <typename T>
T get(const YAML::Node& node, const std::string& key, const std::string& ctx) {
  if (!node[key]) throw ConfigError(ctx + ": missing key '" + key + "'");
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(ctx + ": bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const YAML::Node& node, const std::string& key, T fallback,
         const std::string& ctx) {
  if (!node[key]) return fallback;
  return get<T>(node, key, ctx);
}

Vec3 vec3(const YAML::Node& node, const std::string& ctx);
std::vector<double> doubles(const YAML::Node& node, const std::string& ctx);
/// Pose as {translation: [x,y,z], rotation: [w,x,y,z]} or with
/// rpy: [roll, pitch, yaw] (fixed axes X, Y, Z) instead of rotation.
Pose pose(const YAML::Node& node, const std::string& ctx);

void emit_vec3(YAML::Emitter& out, const Vec3& v);
void emit_pose(YAML::Emitter& out, const Pose& p);

}  // namespace mobgen::yaml
