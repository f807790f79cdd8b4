// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
#include "mobgen/harness.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "mobgen/action_synthesis.hpp"
#include "mobgen/errors.hpp"
#include "test_util.hpp"

namespace mobgen {
namespace {

using testing::read_bytes;
using testing::TempDir;

constexpr const char* kFixedDrawer = R"(
id: fixed-drawer
robot: planar3
scene:
  robot: [0.0, 0.0, 0.0, 0.3, 0.6, -0.6]
  articulated:
    - name: drawer
      base: {translation: [1.0, 0.1, 0.5], rpy: [0.0, 0.0, 3.141592653589793]}
      joint: {kind: prismatic, axis: [1, 0, 0], limits: [0.0, 0.4], v_max: 0.5, a_max: 1.0}
      grasp: {translation: [0.03, 0.0, 0.0], rpy: [0.0, 1.5707963267948966, 3.141592653589793]}
success: {kind: joint-angle, object: drawer, value: 0.2, threshold: 0.03}
script:
  - {op: approach, object: drawer}
  - {op: gripper-close}
  - {op: vkc, object: drawer, goal: 0.2, steps: 5}
  - {op: gripper-open}
)";

// The box sits 3 m away and the arm may not use the base.
constexpr const char* kOutOfReach = R"(
id: out-of-reach
robot: planar3
scene:
  robot: [0.0, 0.0, 0.0, 0.3, 0.6, -0.6]
  rigid:
    - name: box
      pose: {translation: [3.0, 0.0, 0.5]}
      grasp: {rpy: [0.0, 1.5707963267948966, 0.0]}
success: {kind: distance, object: box, target: box}
script:
  - {op: approach, object: box, planner: arm-only}
  - {op: gripper-close}
)";

TEST(Tasks, BuiltinsLoad) {
  const auto names = builtin_task_names();
  EXPECT_GE(names.size(), 4u);
  for (const auto& n : names) {
    const Task t = load_task(n);
    EXPECT_EQ(t.id, n);
    EXPECT_FALSE(t.script.empty());
  }
  EXPECT_GE(builtin_robot_names().size(), 2u);
}

TEST(Tasks, Errors) {
  EXPECT_THROW(load_task("no-such-task"), ConfigError);
  EXPECT_THROW(parse_task("id: x\nrobot: planar3\nscript: []\n"), ConfigError);
  std::string bad = kFixedDrawer;
  bad.replace(bad.find("joint-angle"), 11, "bogus-kind");
  EXPECT_THROW(parse_task(bad), ConfigError);
}

TEST(Generate, EveryBuiltinTaskProducesASuccess) {
  for (const auto& n : builtin_task_names()) {
    const Task t = load_task(n);
    const EpisodeResult r = generate_episode(t, 0, 0);
    EXPECT_TRUE(r.success) << n << ": " << r.failure;
    EXPECT_GT(r.demo.steps(), 5) << n;
  }
}

TEST(Generate, FeasibleSceneKeepsOne) {
  TempDir dir("gen_ok");
  const Task t = parse_task(kFixedDrawer);
  GenerateOptions o;
  o.episodes = 1;
  o.out = dir / "ds";
  const GenerateReport r = generate_dataset(t, o);
  EXPECT_EQ(r.attempted, 1u);
  EXPECT_EQ(r.kept, 1u);
  const auto demos = read_dataset(o.out);
  ASSERT_EQ(demos.size(), 1u);
  EXPECT_TRUE(demos[0].success);
  EXPECT_EQ(demos[0].metadata.at("robot"), "planar3");
}

TEST(Generate, InfeasibleSceneKeepsNone) {
  TempDir dir("gen_bad");
  const Task t = parse_task(kOutOfReach);
  GenerateOptions o;
  o.episodes = 2;
  o.out = dir / "ds";
  const GenerateReport r = generate_dataset(t, o);
  EXPECT_EQ(r.attempted, 2u);
  EXPECT_EQ(r.kept, 0u);
  EXPECT_EQ(r.failures.size(), 2u);
}

TEST(Generate, DeterministicAcrossWorkerCounts) {
  TempDir dir("gen_det");
  const Task t = load_task("reach-drawer");
  GenerateOptions a;
  a.episodes = 4;
  a.seed = 5;
  a.out = dir / "a";
  GenerateOptions b = a;
  b.out = dir / "b";
  b.workers = 3;
  generate_dataset(t, a);
  generate_dataset(t, b);
  std::vector<std::string> fa, fb;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a.out))
    if (e.is_regular_file()) fa.push_back(std::filesystem::relative(e.path(), a.out));
  for (const auto& e : std::filesystem::recursive_directory_iterator(b.out))
    if (e.is_regular_file()) fb.push_back(std::filesystem::relative(e.path(), b.out));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  ASSERT_EQ(fa, fb);
  for (const auto& f : fa) EXPECT_EQ(read_bytes(a.out / f), read_bytes(b.out / f)) << f;
}

TEST(TaskEnv, BaseVelocityIsInBodyFrame) {
  Eigen::VectorXd from = Eigen::VectorXd::Zero(6), to = Eigen::VectorXd::Zero(6);
  from[2] = M_PI / 2;
  to[1] = 0.1;
  to[2] = M_PI / 2 + 0.05;
  const Vec3 v = base_velocity_action(from, to, 0.1);
  // Moving +y in the world is moving forward when facing +y.
  EXPECT_NEAR(v.x(), 1.0, 1e-12);
  EXPECT_NEAR(v.y(), 0.0, 1e-12);
  EXPECT_NEAR(v.z(), 0.5, 1e-12);
}

TEST(TaskEnv, ReplayedDemonstrationsSucceed) {
  const Task t = load_task("reach-drawer");
  std::vector<Eigen::MatrixXd> actions;
  const int n = 6;
  for (int e = 0; e < n; ++e) {
    const EpisodeResult r = generate_episode(t, 3, e);
    ASSERT_TRUE(r.success) << r.failure;
    actions.push_back(r.demo.actions.cast<double>());
  }
  TaskEnv env(t, 3);
  RolloutOptions o;
  o.episodes = n;
  o.horizon = 400;
  o.executed = 4;
  EXPECT_EQ(kinematic_rollout_eval(ReplayPolicy(actions, 8, 4), env, 8, o), 1.0);
}

TEST(TaskEnv, UntrainedNetIsAtChance) {
  const Task t = load_task("reach-drawer");
  TaskEnv env(t, 0);
  env.reset(0);
  FlowNetConfig c;
  c.obs_dim = env.obs_dim();
  c.action_dim = env.action_dim();
  c.horizon = 8;
  c.hidden = {64, 64};
  FlowNet net(c, 17);
  net.obs_norm = Normalizer::Identity(c.obs_dim);
  net.act_norm = Normalizer::Identity(c.action_dim);
  RolloutOptions o;
  o.episodes = 20;
  o.horizon = 150;
  o.first_episode = kEvalEpisodeBase;
  EXPECT_LE(kinematic_rollout_eval(FlowPolicy(net, 10, 1), env, 8, o), 0.05);
}

TEST(TaskEnv, ClosingNearHandleAttaches) {
  const Task t = parse_task(kFixedDrawer);
  const EpisodeResult r = generate_episode(t, 0, 0);
  ASSERT_TRUE(r.success) << r.failure;
  TaskEnv env(t, 0);
  env.reset(0);
  for (int i = 0; i < r.demo.steps(); ++i) env.step(r.demo.actions.row(i).cast<double>().transpose());
  EXPECT_NEAR(env.state().articulated[0].joint_value, 0.2, 0.03);
  EXPECT_FALSE(env.state().gripper_closed);
}

TEST(Bench, ConfigValidation) {
  EXPECT_THROW(BenchConfig::FromYaml("tasks: [reach-drawer]\nbogus: 1\n"), ConfigError);
  EXPECT_THROW(BenchConfig::FromYaml("tasks: []\n"), ConfigError);
  EXPECT_THROW(BenchConfig::FromYaml("tasks: [reach-drawer]\ndemo_counts: [0]\n"),
               ConfigError);
  const BenchConfig c = BenchConfig::FromYaml("tasks: [reach-drawer]\nseeds: [4, 5]\n");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{4, 5}));
}

TEST(Bench, SingleCellGivesOneRow) {
  const BenchConfig c = BenchConfig::FromYaml(R"(
tasks: [reach-drawer]
demo_counts: [3]
rollouts: 2
seeds: [0]
rollout_horizon: 20
net: {horizon: 4, hidden: [16]}
train: {batch_size: 8, total_steps: 10, warmup_steps: 2}
)");
  const auto rows = run_bench(c, nullptr);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].task, "reach-drawer");
  EXPECT_EQ(rows[0].demos, 3);
  EXPECT_EQ(rows[0].rollouts, 2);
  TempDir dir("bench");
  write_bench_csv(dir / "b.csv", rows);
  const std::string csv = read_bytes(dir / "b.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.rfind("task,demos,rollouts,successes,rate\n", 0), 0u);
}

}  // namespace
}  // namespace mobgen
