// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "mobgen/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "mobgen/errors.hpp"
#include "mobgen/rng.hpp"
#include "mobgen/topp.hpp"
#include "yaml_util.hpp"

namespace mobgen {

const std::map<std::string, std::string>& builtin_files();

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + what + " " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> builtin_names(const std::string& kind) {
  std::vector<std::string> names;
  const std::string prefix = kind + "/";
  for (const auto& [key, text] : builtin_files()) {
    if (key.rfind(prefix, 0) == 0 && key.size() > prefix.size() + 5) {
      names.push_back(key.substr(prefix.size(), key.size() - prefix.size() - 5));
    }
  }
  return names;
}

const std::string* builtin(const std::string& kind, const std::string& name) {
  const auto it = builtin_files().find(kind + "/" + name + ".yaml");
  return it == builtin_files().end() ? nullptr : &it->second;
}

JointSpec parse_joint(const YAML::Node& n, const std::string& ctx) {
  if (!n || !n.IsMap()) throw ConfigError(ctx + ": joint map required");
  JointSpec j;
  j.name = yaml::get_or<std::string>(n, "name", "joint", ctx);
  j.kind = joint_kind_from_string(yaml::get<std::string>(n, "kind", ctx));
  if (n["axis"]) j.axis = yaml::vec3(n["axis"], ctx + ".axis");
  j.origin = yaml::pose(n["origin"], ctx + ".origin");
  const auto lim = yaml::doubles(n["limits"], ctx + ".limits");
  if (lim.size() != 2) throw ConfigError(ctx + ": limits need [min, max]");
  j.min = lim[0];
  j.max = lim[1];
  j.v_max = yaml::get_or<double>(n, "v_max", 1.0, ctx);
  j.a_max = yaml::get_or<double>(n, "a_max", 1.0, ctx);
  j.validate();
  return j;
}

Eigen::VectorXd vector_of(const YAML::Node& n, const std::string& ctx) {
  const auto v = yaml::doubles(n, ctx);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::pair<double, double> range_of(const YAML::Node& n, const std::string& ctx) {
  const auto v = yaml::doubles(n, ctx);
  if (v.size() != 2) throw ConfigError(ctx + ": expected [min, max]");
  return {v[0], v[1]};
}

void parse_planner(const YAML::Node& n, PlannerSettings* p) {
  if (!n) return;
  const std::string ctx = "planner";
  p->T = yaml::get_or<int>(n, "T", p->T, ctx);
  auto& w = p->weights;
  w.w_pos = yaml::get_or<double>(n, "w_pos", w.w_pos, ctx);
  w.w_rot = yaml::get_or<double>(n, "w_rot", w.w_rot, ctx);
  w.w_yaw = yaml::get_or<double>(n, "w_yaw", w.w_yaw, ctx);
  w.w_col = yaml::get_or<double>(n, "w_col", w.w_col, ctx);
  w.d_safe = yaml::get_or<double>(n, "d_safe", w.d_safe, ctx);
  p->solver.max_iters = yaml::get_or<int>(n, "max_iters", p->solver.max_iters, ctx);
  p->grid_per_waypoint =
      yaml::get_or<int>(n, "grid_per_waypoint", p->grid_per_waypoint, ctx);
  p->min_grid = yaml::get_or<int>(n, "min_grid", p->min_grid, ctx);
  p->dt = yaml::get_or<double>(n, "dt", p->dt, ctx);
  p->gripper_steps = yaml::get_or<int>(n, "gripper_steps", p->gripper_steps, ctx);
  if (p->T < 2 || p->dt <= 0.0 || p->gripper_steps < 1 || p->min_grid < 2 ||
      p->grid_per_waypoint < 1) {
    throw ConfigError("planner: T >= 2, dt > 0, gripper_steps >= 1 required");
  }
}

}  // namespace

std::vector<std::string> builtin_task_names() { return builtin_names("tasks"); }
std::vector<std::string> builtin_robot_names() { return builtin_names("robots"); }

RobotModel load_robot(const std::string& name_or_path) {
  if (const auto* text = builtin("robots", name_or_path)) {
    return RobotModel::FromYaml(*text);
  }
  if (fs::exists(name_or_path)) return RobotModel::Load(name_or_path);
  throw ConfigError("unknown robot '" + name_or_path + "'");
}

Task load_task(const std::string& name_or_path) {
  if (const auto* text = builtin("tasks", name_or_path)) return parse_task(*text);
  if (fs::exists(name_or_path)) {
    const fs::path p(name_or_path);
    return parse_task(read_text(p, "task"), p.parent_path());
  }
  throw ConfigError("unknown task '" + name_or_path + "'");
}

Task parse_task(const std::string& yaml_text, const fs::path& base_dir) {
  const YAML::Node root = yaml::parse(yaml_text, "task");
  Task t;
  t.id = yaml::get<std::string>(root, "id", "task");
  const std::string robot = yaml::get<std::string>(root, "robot", "task");
  if (builtin("robots", robot) || base_dir.empty()) {
    t.robot = std::make_shared<RobotModel>(load_robot(robot));
  } else {
    t.robot = std::make_shared<RobotModel>(load_robot((base_dir / robot).string()));
  }

  const YAML::Node scene = root["scene"];
  if (!scene || !scene.IsMap()) throw ConfigError("task: 'scene' map required");
  t.scene.robot = scene["robot"] ? vector_of(scene["robot"], "scene.robot")
                                 : Configuration::Zero(t.robot->dofs());
  if (t.scene.robot.size() != t.robot->dofs()) {
    throw ConfigError("scene.robot: expected " + std::to_string(t.robot->dofs()) +
                      " joint values");
  }
  if (!t.robot->within_limits(t.scene.robot, 1e-9)) {
    throw ConfigError("scene.robot: configuration outside joint limits");
  }
  for (const auto& n : scene["articulated"]) {
    ArticulatedObject o;
    o.name = yaml::get<std::string>(n, "name", "articulated object");
    const std::string ctx = "object '" + o.name + "'";
    o.base_pose = yaml::pose(n["base"], ctx + ".base");
    o.joint = parse_joint(n["joint"], ctx + ".joint");
    o.link_origin = yaml::pose(n["link_origin"], ctx + ".link_origin");
    o.handle_grasp = yaml::pose(n["grasp"], ctx + ".grasp");
    o.joint_value = yaml::get_or<double>(n, "value", 0.0, ctx);
    if (n["parent"]) {
      const auto parent = yaml::get<std::string>(n, "parent", ctx);
      int idx = -1;
      for (std::size_t i = 0; i < t.scene.articulated.size(); ++i) {
        if (t.scene.articulated[i].name == parent) idx = static_cast<int>(i);
      }
      if (idx < 0) throw ConfigError(ctx + ": parent must be listed earlier");
      o.parent = idx;
    }
    o.validate();
    t.scene.articulated.push_back(o);
  }
  for (const auto& n : scene["rigid"]) {
    RigidObject o;
    o.name = yaml::get<std::string>(n, "name", "rigid object");
    const std::string ctx = "object '" + o.name + "'";
    o.pose = yaml::pose(n["pose"], ctx + ".pose");
    o.grasp = yaml::pose(n["grasp"], ctx + ".grasp");
    if (const auto fa = n["functional_axis"]) {
      FunctionalAxis a;
      a.point = yaml::vec3(fa["point"], ctx + ".functional_axis.point");
      a.direction = yaml::vec3(fa["direction"], ctx + ".functional_axis.direction");
      o.functional_axis = a;
    }
    o.extent = yaml::get_or<double>(n, "extent", o.extent, ctx);
    o.validate();
    t.scene.rigid.push_back(o);
  }
  for (const auto& n : scene["obstacles"]) {
    Obstacle o;
    o.center = yaml::vec3(n["center"], "obstacle.center");
    o.radius = yaml::get<double>(n, "radius", "obstacle");
    o.attach = yaml::get_or<std::string>(n, "attach", "", "obstacle");
    if (!(o.radius > 0.0)) throw ConfigError("obstacle: radius must be > 0");
    t.scene.obstacles.push_back(o);
  }

  if (const YAML::Node r = root["reset"]) {
    const std::string ctx = "reset";
    if (const auto p = r["position"]) {
      t.reset.position_min = yaml::vec3(p["min"], "reset.position.min");
      t.reset.position_max = yaml::vec3(p["max"], "reset.position.max");
    }
    if (r["yaw"]) std::tie(t.reset.yaw_min, t.reset.yaw_max) = range_of(r["yaw"], "reset.yaw");
    if (r["scale"]) {
      std::tie(t.reset.scale_min, t.reset.scale_max) = range_of(r["scale"], "reset.scale");
    }
    if (const auto a = r["arm"]) {
      t.reset.arm_min = vector_of(a["min"], "reset.arm.min");
      t.reset.arm_max = vector_of(a["max"], "reset.arm.max");
    }
    if (r["targets"]) t.reset.targets = yaml::get<std::vector<std::string>>(r, "targets", ctx);
  }
  t.reset.validate(t.robot->arm_dofs());

  const YAML::Node s = root["success"];
  if (!s) throw ConfigError("task: 'success' predicate required");
  const auto kind = yaml::get<std::string>(s, "kind", "success");
  if (kind == "distance") {
    t.success.kind = SuccessKind::kDistance;
    t.success.target = yaml::get<std::string>(s, "target", "success");
  } else if (kind == "joint-angle") {
    t.success.kind = SuccessKind::kJointAngle;
    t.success.target_joint_value = yaml::get<double>(s, "value", "success");
  } else {
    throw ConfigError("success: unknown kind '" + kind + "'");
  }
  t.success.object = yaml::get<std::string>(s, "object", "success");
  t.success.threshold = yaml::get_or<double>(
      s, "threshold", t.success.kind == SuccessKind::kDistance ? 0.02 : 0.05,
      "success");
  t.success.validate();

  if (!root["script"]) throw ConfigError("task: 'script' required");
  t.script = parse_script(YAML::Dump(root["script"]));
  parse_planner(root["planner"], &t.planner);
  t.planner.weights.validate(t.robot->dofs());
  return t;
}

// ------------------------------------------------------------- TaskEnv

TaskEnv::TaskEnv(const Task& task, std::uint64_t seed, double attach_radius)
    : task_(task), seed_(seed), attach_radius_(attach_radius) {
  reset(0);
}

void TaskEnv::reset(std::uint64_t episode) {
  ResetSpec spec = task_.reset;
  spec.seed = seed_;
  state_ = reset_episode(task_.scene, spec, episode);
  held_rigid_ = -1;
  held_articulated_ = -1;
}

int TaskEnv::obs_dim() const {
  return task_.robot->arm_dofs() + 1 +
         7 * static_cast<int>(task_.scene.articulated.size()) +
         6 * static_cast<int>(task_.scene.rigid.size());
}

Eigen::VectorXd TaskEnv::observe() const {
  Eigen::VectorXd o(obs_dim());
  const int b = RobotModel::kBaseDofs;
  const int arm = task_.robot->arm_dofs();
  o.head(arm) = state_.robot.tail(arm);
  o[arm] = state_.gripper_closed ? 1.0 : 0.0;
  const Pose base_inv =
      Pose::Planar(state_.robot[0], state_.robot[1], state_.robot[b - 1]).inverse();
  int k = arm + 1;
  auto put = [&](const Pose& world_grasp) {
    const Pose g = base_inv * world_grasp;
    o.segment<3>(k) = g.translation();
    o.segment<3>(k + 3) = g.rotation() * Vec3::UnitZ();
    k += 6;
  };
  for (std::size_t i = 0; i < state_.articulated.size(); ++i) {
    put(state_.world_link(static_cast<int>(i)) * state_.articulated[i].handle_grasp);
    o[k++] = state_.articulated[i].joint_value;
  }
  for (const auto& r : state_.rigid) put(r.pose * r.grasp);
  return o;
}

Vec3 base_velocity_action(const Configuration& from, const Configuration& to,
                          double dt) {
  const double yaw = from[RobotModel::kYawIndex];
  const Eigen::Vector2d d = Eigen::Rotation2Dd(-yaw) *
                            Eigen::Vector2d(to[0] - from[0], to[1] - from[1]);
  return Vec3(d.x(), d.y(), to[2] - from[2]) / dt;
}

void TaskEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != action_dim()) {
    throw DimensionMismatch("task env action", action_dim(), action.size());
  }
  const RobotModel& m = *task_.robot;
  const int b = RobotModel::kBaseDofs;
  Configuration q = state_.robot;
  const double dt = task_.planner.dt;
  const Eigen::Vector2d d =
      Eigen::Rotation2Dd(q[RobotModel::kYawIndex]) * action.head<2>() * dt;
  q[0] += d.x();
  q[1] += d.y();
  q[RobotModel::kYawIndex] += action[RobotModel::kYawIndex] * dt;
  q.segment(b, m.arm_dofs()) = action.segment(b, m.arm_dofs());
  state_.robot = m.clamp(q);

  const bool close = action[m.dofs()] > 0.5;
  if (close && !state_.gripper_closed) {
    state_.gripper_closed = true;
    attach();
  } else if (!close && state_.gripper_closed) {
    state_.gripper_closed = false;
    held_rigid_ = -1;
    held_articulated_ = -1;
  }
  if (held_rigid_ >= 0) {
    state_.rigid[held_rigid_].pose = m.forward_kinematics(state_.robot) * held_rel_;
  }
  if (held_articulated_ >= 0) follow_articulated();
}

void TaskEnv::attach() {
  const Pose eef = task_.robot->forward_kinematics(state_.robot);
  double best = attach_radius_;
  for (std::size_t i = 0; i < state_.rigid.size(); ++i) {
    const auto& r = state_.rigid[i];
    const double d = ((r.pose * r.grasp).translation() - eef.translation()).norm();
    if (d <= best) best = d, held_rigid_ = static_cast<int>(i), held_articulated_ = -1;
  }
  for (std::size_t i = 0; i < state_.articulated.size(); ++i) {
    const Pose g = state_.world_link(static_cast<int>(i)) *
                   state_.articulated[i].handle_grasp;
    const double d = (g.translation() - eef.translation()).norm();
    if (d <= best) best = d, held_articulated_ = static_cast<int>(i), held_rigid_ = -1;
  }
  if (held_rigid_ >= 0) held_rel_ = eef.inverse() * state_.rigid[held_rigid_].pose;
}

void TaskEnv::follow_articulated() {
  // Joint values of the held object and its ancestors that best keep the
  // grasp point on the end-effector (damped Gauss-Newton).
  std::vector<int> chain;
  for (int i = held_articulated_; i >= 0;) {
    chain.push_back(i);
    const auto& p = state_.articulated[i].parent;
    i = p ? *p : -1;
  }
  const int n = static_cast<int>(chain.size());
  const Vec3 target = task_.robot->forward_kinematics(state_.robot).translation();
  auto grasp_point = [&]() {
    return (state_.world_link(held_articulated_) *
            state_.articulated[held_articulated_].handle_grasp)
        .translation();
  };
  constexpr double kH = 1e-6;
  for (int iter = 0; iter < 8; ++iter) {
    const Vec3 r = grasp_point() - target;
    if (r.norm() < 1e-9) break;
    Eigen::Matrix3Xd J(3, n);
    for (int c = 0; c < n; ++c) {
      double& v = state_.articulated[chain[c]].joint_value;
      const double saved = v;
      v = saved + kH;
      const Vec3 plus = grasp_point();
      v = saved - kH;
      const Vec3 minus = grasp_point();
      v = saved;
      J.col(c) = (plus - minus) / (2.0 * kH);
    }
    const Eigen::MatrixXd A =
        J.transpose() * J + 1e-6 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd delta = A.ldlt().solve(-J.transpose() * r);
    for (int c = 0; c < n; ++c) {
      auto& obj = state_.articulated[chain[c]];
      obj.joint_value =
          std::clamp(obj.joint_value + delta[c], obj.joint.min, obj.joint.max);
    }
  }
}

bool TaskEnv::success() const { return check_success(state_, task_.success); }

// ---------------------------------------------------------- generation

namespace {

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<SphereObstacle> sphere_obstacles(const SceneState& s) {
  std::vector<SphereObstacle> out;
  for (const auto& [c, r] : s.world_obstacles()) out.push_back({c, r});
  return out;
}

struct Row {
  Configuration q;
  bool closed = false;
};

}  // namespace

EpisodeResult generate_episode(const Task& task, std::uint64_t seed,
                               std::uint64_t episode) {
  EpisodeResult res;
  const RobotModel& model = *task.robot;
  const PlannerSettings& ps = task.planner;
  ResetSpec spec = task.reset;
  spec.seed = seed;
  const SceneState start = reset_episode(task.scene, spec, episode);

  TaskPlan plan;
  try {
    plan = compose_primitives(task.script, start,
                              model.forward_kinematics(start.robot));
  } catch (const TaskError& e) {
    res.failure = std::string("script: ") + e.what();
    return res;
  }

  std::vector<Row> rows = {{start.robot, start.gripper_closed}};
  PlanRequest settings;
  settings.model = &model;
  settings.T = ps.T;
  settings.weights = ps.weights;
  settings.solver = ps.solver;
  settings.obstacles = sphere_obstacles(start);
  for (const PlanStep& step : plan.steps) {
    const Row last = rows.back();
    if (step.gripper_only) {
      const bool closed = step.waypoints.front().gripper == Gripper::kClose;
      for (int i = 0; i < ps.gripper_steps; ++i) rows.push_back({last.q, closed});
      continue;
    }
    std::vector<Pose> poses;
    for (const auto& w : step.waypoints) poses.push_back(w.pose);
    settings.mode = step.group;
    settings.weights.yaw_ref.reset();
    const WholeBodyTrajectory wb =
        track_eef_waypoints(model, last.q, poses, settings);
    if (!wb.converged) {
      res.failure = std::string("planner did not converge on ") +
                    to_string(step.kind) + " step";
      return res;
    }
    const int n = std::max(ps.min_grid,
                           ps.grid_per_waypoint * static_cast<int>(wb.waypoints.size()));
    TimedTrajectory timed;
    try {
      timed = retime(GeometricPath::Resampled(wb.waypoints, n), model.v_max(),
                     model.a_max());
    } catch (const DegeneratePath&) {
      continue;
    } catch (const InfeasiblePath& e) {
      res.failure = e.what();
      return res;
    }
    const auto samples = sample_timed(timed, ps.dt);
    for (std::size_t i = 1; i < samples.size(); ++i) {
      rows.push_back({model.clamp(samples[i].q), last.closed});
    }
  }
  if (rows.size() < 2) {
    res.failure = "empty trajectory";
    return res;
  }

  // Kinematic playback of the recorded actions (float32, as stored).
  TaskEnv env(task, seed);
  env.reset(episode);
  const int b = RobotModel::kBaseDofs;
  const int steps = static_cast<int>(rows.size()) - 1;
  Demonstration& d = res.demo;
  d.task_id = task.id;
  d.seed = seed;
  d.episode = episode;
  d.observations.resize(steps, env.obs_dim());
  d.actions.resize(steps, env.action_dim());
  for (int t = 0; t < steps; ++t) {
    Eigen::VectorXd a(env.action_dim());
    a.head(b) = base_velocity_action(env.state().robot, rows[t + 1].q, ps.dt);
    a.segment(b, model.arm_dofs()) = rows[t + 1].q.tail(model.arm_dofs());
    a[model.dofs()] = rows[t + 1].closed ? 1.0 : 0.0;
    a = a.unaryExpr(&to_f32);
    d.observations.row(t) = env.observe().cast<float>().transpose();
    d.actions.row(t) = a.cast<float>().transpose();
    env.step(a);
  }
  res.success = env.success();
  d.success = res.success;

  const int objects =
      static_cast<int>(start.articulated.size() + start.rigid.size());
  d.object_poses.resize(objects, 7);
  int k = 0;
  for (std::size_t i = 0; i < start.articulated.size(); ++i, ++k) {
    d.object_names.push_back(start.articulated[i].name);
    const auto f = start.world_base(static_cast<int>(i)).to_floats();
    for (int c = 0; c < 7; ++c) d.object_poses(k, c) = static_cast<float>(f[c]);
  }
  for (const auto& r : start.rigid) {
    d.object_names.push_back(r.name);
    const auto f = r.pose.to_floats();
    for (int c = 0; c < 7; ++c) d.object_poses(k, c) = static_cast<float>(f[c]);
    ++k;
  }
  d.metadata["robot"] = model.name();
  d.metadata["dt"] = fmt_double(ps.dt);
  d.metadata["success_error"] = fmt_double(success_error(env.state(), task.success));
  for (const auto& dr : start.draws) {
    d.metadata["draw." + dr.name] =
        fmt_double(dr.offset.x()) + " " + fmt_double(dr.offset.y()) + " " +
        fmt_double(dr.offset.z()) + " " + fmt_double(dr.yaw) + " " +
        fmt_double(dr.scale);
  }
  if (!res.success) {
    res.failure = "success predicate failed (error " +
                  d.metadata["success_error"] + ")";
  }
  return res;
}

GenerateReport generate_dataset(const Task& task, const GenerateOptions& opts) {
  if (opts.out.empty()) throw ConfigError("generate: output directory required");
  if (opts.workers < 1) throw ConfigError("generate: workers must be >= 1");
  fs::create_directories(opts.out);
  const std::size_t n = static_cast<std::size_t>(opts.episodes);
  std::vector<std::string> failures(n);
  std::vector<char> kept(n, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const std::uint64_t ep = opts.first_episode + i;
        EpisodeResult r = generate_episode(task, opts.seed, ep);
        if (r.success) {
          write_demo(r.demo, opts.out / episode_dir_name(ep));
          kept[i] = 1;
        } else {
          failures[i] = r.failure;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int workers = static_cast<int>(std::min<std::size_t>(opts.workers, std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  GenerateReport report;
  report.attempted = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (kept[i]) {
      ++report.kept;
    } else {
      report.failures.push_back("episode " +
                                std::to_string(opts.first_episode + i) + ": " +
                                failures[i]);
    }
  }
  std::ofstream summary(opts.out / "dataset.txt", std::ios::binary);
  if (!summary) throw IoError("cannot write " + (opts.out / "dataset.txt").string());
  summary << "task: " << task.id << "\n"
          << "seed: " << opts.seed << "\n"
          << "first_episode: " << opts.first_episode << "\n"
          << "attempted: " << report.attempted << "\n"
          << "kept: " << report.kept << "\n";
  return report;
}

// --------------------------------------------------------------- bench

namespace {

const std::vector<std::string> kBenchKeys = {
    "tasks", "demo_counts", "rollouts", "seeds", "rollout_horizon",
    "executed", "net", "train"};

void check_keys(const YAML::Node& n, const std::vector<std::string>& allowed,
                const std::string& ctx) {
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(ctx + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace

BenchConfig BenchConfig::FromYaml(const std::string& text) {
  const YAML::Node root = yaml::parse(text, "bench config");
  if (!root.IsMap()) throw ConfigError("bench config: expected a map");
  check_keys(root, kBenchKeys, "bench config");
  const std::string ctx = "bench config";
  BenchConfig c;
  c.tasks = yaml::get<std::vector<std::string>>(root, "tasks", ctx);
  c.demo_counts = yaml::get_or<std::vector<int>>(root, "demo_counts", c.demo_counts, ctx);
  c.rollouts = yaml::get_or<int>(root, "rollouts", c.rollouts, ctx);
  c.seeds = yaml::get_or<std::vector<std::uint64_t>>(root, "seeds", c.seeds, ctx);
  c.rollout_horizon = yaml::get_or<int>(root, "rollout_horizon", c.rollout_horizon, ctx);
  c.executed = yaml::get_or<int>(root, "executed", c.executed, ctx);
  if (const auto n = root["net"]) {
    check_keys(n, {"horizon", "time_embed", "hidden"}, "bench config.net");
    c.net.horizon = yaml::get_or<int>(n, "horizon", c.net.horizon, ctx);
    c.net.time_embed = yaml::get_or<int>(n, "time_embed", c.net.time_embed, ctx);
    c.net.hidden = yaml::get_or<std::vector<int>>(n, "hidden", c.net.hidden, ctx);
  }
  if (const auto t = root["train"]) {
    check_keys(t, {"batch_size", "total_steps", "peak_lr", "min_lr",
                   "warmup_steps", "weight_decay", "clip_norm", "train_levels",
                   "inference_steps"},
               "bench config.train");
    auto& tr = c.train;
    tr.batch_size = yaml::get_or<int>(t, "batch_size", tr.batch_size, ctx);
    tr.total_steps = yaml::get_or<int>(t, "total_steps", tr.total_steps, ctx);
    tr.peak_lr = yaml::get_or<double>(t, "peak_lr", tr.peak_lr, ctx);
    tr.min_lr = yaml::get_or<double>(t, "min_lr", tr.min_lr, ctx);
    tr.warmup_steps = yaml::get_or<int>(t, "warmup_steps", tr.warmup_steps, ctx);
    tr.weight_decay = yaml::get_or<double>(t, "weight_decay", tr.weight_decay, ctx);
    tr.clip_norm = yaml::get_or<double>(t, "clip_norm", tr.clip_norm, ctx);
    tr.train_levels = yaml::get_or<int>(t, "train_levels", tr.train_levels, ctx);
    tr.inference_steps =
        yaml::get_or<int>(t, "inference_steps", tr.inference_steps, ctx);
  }
  c.validate();
  return c;
}

void BenchConfig::validate() const {
  if (tasks.empty()) throw ConfigError("bench: at least one task required");
  if (demo_counts.empty()) throw ConfigError("bench: demo_counts is empty");
  for (int n : demo_counts) {
    if (n < 1) throw ConfigError("bench: demo counts must be positive");
  }
  if (rollouts < 1 || rollout_horizon < 1) {
    throw ConfigError("bench: rollouts and rollout_horizon must be positive");
  }
  if (seeds.empty()) throw ConfigError("bench: at least one seed required");
  if (net.horizon < 1 || net.time_embed < 1 || net.hidden.empty()) {
    throw ConfigError("bench: bad network dimensions");
  }
  for (int h : net.hidden) {
    if (h < 1) throw ConfigError("bench: hidden sizes must be positive");
  }
  train.validate();
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg, std::ostream* log) {
  cfg.validate();
  const int max_count = *std::max_element(cfg.demo_counts.begin(), cfg.demo_counts.end());
  std::vector<BenchRow> rows;
  for (const auto& task_name : cfg.tasks) {
    const Task task = load_task(task_name);
    std::vector<BenchRow> task_rows;
    for (int n : cfg.demo_counts) task_rows.push_back({task.id, n, 0, 0, 0.0, {}});
    for (const std::uint64_t seed : cfg.seeds) {
      std::vector<Demonstration> demos;
      const std::uint64_t attempts_cap = 4ull * max_count + 20;
      std::uint64_t ep = 0;
      for (; ep < attempts_cap && static_cast<int>(demos.size()) < max_count; ++ep) {
        EpisodeResult r = generate_episode(task, seed, ep);
        if (r.success) demos.push_back(std::move(r.demo));
      }
      if (log) {
        *log << task.id << " seed " << seed << ": " << demos.size()
             << " demos from " << ep << " episodes\n";
      }
      if (demos.empty()) throw TaskError("bench: no successful demonstrations for " + task.id);
      for (std::size_t c = 0; c < cfg.demo_counts.size(); ++c) {
        const int n = std::min<int>(cfg.demo_counts[c], static_cast<int>(demos.size()));
        const std::vector<Demonstration> subset(demos.begin(), demos.begin() + n);
        FlowNetConfig nc = cfg.net;
        nc.obs_dim = static_cast<int>(subset.front().observations.cols());
        nc.action_dim = static_cast<int>(subset.front().actions.cols());
        FlowNet net(nc, mix_seed(seed, static_cast<std::uint64_t>(n), 1));
        TrainConfig tc = cfg.train;
        tc.seed = mix_seed(seed, static_cast<std::uint64_t>(n), 2);
        co_train(net, chunk_samples(subset, nc.horizon), {}, tc);

        TaskEnv env(task, seed);
        const FlowPolicy policy(net, tc.inference_steps,
                                mix_seed(seed, static_cast<std::uint64_t>(n), 3));
        RolloutOptions ro;
        ro.episodes = cfg.rollouts;
        ro.horizon = cfg.rollout_horizon;
        ro.executed = cfg.executed;
        ro.first_episode = kEvalEpisodeBase;
        const double rate = kinematic_rollout_eval(policy, env, nc.horizon, ro);
        BenchRow& row = task_rows[c];
        row.rollouts += cfg.rollouts;
        row.successes += static_cast<int>(std::lround(rate * cfg.rollouts));
        row.seed_rates.push_back(rate);
        if (log) {
          *log << task.id << " seed " << seed << " demos " << n << ": rate "
               << rate << "\n";
        }
      }
    }
    for (auto& row : task_rows) {
      double sum = 0.0;
      for (double r : row.seed_rates) sum += r;
      row.rate = sum / static_cast<double>(row.seed_rates.size());
      rows.push_back(row);
    }
  }
  return rows;
}

void write_bench_csv(const fs::path& path, const std::vector<BenchRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "task,demos,rollouts,successes,rate\n";
  for (const auto& r : rows) {
    out << r.task << ',' << r.demos << ',' << r.rollouts << ',' << r.successes
        << ',' << fmt_double(r.rate) << '\n';
  }
}

}  // namespace mobgen
