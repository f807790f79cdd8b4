// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Task files, the kinematic task environment, demonstration generation and
// the benchmark driver behind the mobgen command line.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mobgen/action_synthesis.hpp"
#include "mobgen/dataset_io.hpp"
#include "mobgen/flow_policy.hpp"
#include "mobgen/robot_model.hpp"
#include "mobgen/scene.hpp"
#include "mobgen/wholebody_opt.hpp"

namespace mobgen {

struct PlannerSettings {
  int T = 10;  // waypoints per tracked segment
  CostWeights weights;
  SolverOptions solver;
  int grid_per_waypoint = 4;  // TOPP grid points per tracked waypoint
  int min_grid = 50;
  double dt = 0.1;            // control period of recorded demonstrations
  int gripper_steps = 3;      // control steps spent on a gripper command
};

struct Task {
  std::string id;
  std::shared_ptr<const RobotModel> robot;
  SceneTemplate scene;
  ResetSpec reset;
  SuccessPredicate success;
  std::vector<Primitive> script;
  PlannerSettings planner;
};

/// Robot by built-in name (e.g. "mm_scara") or YAML path.
RobotModel load_robot(const std::string& name_or_path);
/// Task by built-in name (e.g. "open-drawer") or YAML path.
Task load_task(const std::string& name_or_path);
/// Relative robot paths resolve against base_dir.
Task parse_task(const std::string& yaml_text,
                const std::filesystem::path& base_dir = {});
std::vector<std::string> builtin_task_names();
std::vector<std::string> builtin_robot_names();

/// Kinematic playback of a task. Actions are
/// [base velocity (forward, lateral, yaw rate) in the base frame; arm joint
/// targets; gripper], with the gripper closed for values > 0.5. Closing
/// within attach_radius of a grasp attaches the object: rigid objects follow
/// the end-effector, articulated ones (and their articulated ancestors) take
/// the joint values that keep the grasp on the end-effector.
class TaskEnv : public RolloutEnv {
 public:
  TaskEnv(const Task& task, std::uint64_t seed, double attach_radius = 0.05);

  void reset(std::uint64_t episode) override;
  /// Egocentric: [arm joints; gripper; per articulated object: grasp
  /// position and approach axis in the base frame, joint value; per rigid
  /// object: grasp position and approach axis in the base frame]
  Eigen::VectorXd observe() const override;
  void step(const Eigen::VectorXd& action) override;
  bool success() const override;

  int obs_dim() const;
  int action_dim() const { return task_.robot->dofs() + 1; }
  const SceneState& state() const { return state_; }
  double dt() const { return task_.planner.dt; }

 private:
  const Task& task_;
  std::uint64_t seed_;
  double attach_radius_;
  SceneState state_;
  int held_rigid_ = -1;
  int held_articulated_ = -1;
  Pose held_rel_;

  void attach();
  void follow_articulated();
};

/// Base-frame velocity that moves the base from `from` to `to` in dt.
Vec3 base_velocity_action(const Configuration& from, const Configuration& to,
                          double dt);

struct EpisodeResult {
  bool success = false;
  std::string failure;  // empty when the episode produced a kept demo
  Demonstration demo;
};

/// One episode of the generation pipeline: reset, waypoint synthesis,
/// whole-body tracking, retiming, sampling at the control period and
/// kinematic playback with success check.
EpisodeResult generate_episode(const Task& task, std::uint64_t seed,
                               std::uint64_t episode);

struct GenerateOptions {
  std::string task;
  std::uint64_t episodes = 1;
  std::uint64_t seed = 0;
  std::uint64_t first_episode = 0;
  std::filesystem::path out;
  int workers = 1;
};

struct GenerateReport {
  std::size_t attempted = 0;
  std::size_t kept = 0;
  std::vector<std::string> failures;  // "episode N: reason"
};

/// Writes each successful episode to out/episode_NNNNNN and a dataset.txt
/// summary. Output does not depend on the worker count.
GenerateReport generate_dataset(const Task& task, const GenerateOptions& opts);

struct BenchConfig {
  std::vector<std::string> tasks;
  std::vector<int> demo_counts = {50, 100, 200};
  int rollouts = 30;
  std::vector<std::uint64_t> seeds = {0};
  int rollout_horizon = 200;
  int executed = -1;
  FlowNetConfig net;
  TrainConfig train;

  static BenchConfig FromYaml(const std::string& text);
  void validate() const;
};

struct BenchRow {
  std::string task;
  int demos = 0;
  int rollouts = 0;   // summed over seeds
  int successes = 0;
  double rate = 0.0;  // mean over seeds
  std::vector<double> seed_rates;
};

/// Generates demonstrations once per (task, seed), trains a policy on the
/// first n for every demo count and evaluates it on held-out episodes.
std::vector<BenchRow> run_bench(const BenchConfig& cfg, std::ostream* log);
void write_bench_csv(const std::filesystem::path& path,
                     const std::vector<BenchRow>& rows);

/// Episode indices used for evaluation start here, away from the
/// generation range.
inline constexpr std::uint64_t kEvalEpisodeBase = 1u << 20;

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitBadArgs = 2,
  kExitConfig = 3,
  kExitIo = 4,
  kExitPlan = 5,
};

/// Full command line (argv[0] included). Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace mobgen
