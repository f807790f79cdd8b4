// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "mobgen/dataset_io.hpp"
#include "mobgen/harness.hpp"
#include "mobgen/pointcloud.hpp"
#include "test_util.hpp"

namespace mobgen {
namespace {

using testing::read_bytes;
using testing::TempDir;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mobgen");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, HelpAndBadArguments) {
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  EXPECT_EQ(cli({"generate", "--bogus-flag"}).code, kExitBadArgs);
  EXPECT_EQ(cli({}).code, kExitBadArgs);
  EXPECT_EQ(cli({"plan", "--goal", "1,2"}).code, kExitBadArgs);
}

TEST(Cli, RetimeBangBang) {
  TempDir dir("cli_retime");
  Eigen::MatrixXd wp(201, 1);
  for (int i = 0; i < 201; ++i) wp(i, 0) = i / 200.0;
  write_array(dir / "path.mbrt", ArrayBlock::FromMatrix(wp));
  const CliRun r = cli({"retime", "--in", (dir / "path.mbrt").string(), "--v-max", "1",
                     "--a-max", "1", "--out", (dir / "timed.mbrt").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex("duration: ([0-9.eE+-]+) s")));
  EXPECT_NEAR(std::stod(m[1]), 2.0, 0.04);
  const ArrayBlock table = read_array(dir / "timed.mbrt");
  EXPECT_EQ(table.dims, (std::vector<std::uint32_t>{201, 3}));
}

TEST(Cli, RetimeErrors) {
  TempDir dir("cli_retime_err");
  write_array(dir / "flat.mbrt", ArrayBlock::FromMatrix(Eigen::MatrixXd(Eigen::MatrixXd::Ones(5, 2))));
  EXPECT_EQ(cli({"retime", "--in", (dir / "flat.mbrt").string(), "--v-max", "1",
                 "--a-max", "1"})
                .code,
            kExitPlan);
  EXPECT_EQ(cli({"retime", "--in", (dir / "missing.mbrt").string(), "--v-max", "1",
                 "--a-max", "1"})
                .code,
            kExitIo);
  EXPECT_EQ(cli({"retime", "--in", (dir / "flat.mbrt").string()}).code, kExitBadArgs);
}

TEST(Cli, PointCloudMatchesComposition) {
  TempDir dir("cli_pc");
  CounterRng rng(60, 0, Stream::kTest);
  PointCloud c;
  for (int i = 0; i < 3000; ++i)
    c.points.emplace_back(rng.uniform(0, 1), rng.uniform(0, 1), 0.1 * rng.normal());
  for (int i = 0; i < 5; ++i) c.points.emplace_back(5 + i, 5, 5);
  write_cloud(dir / "in.mbpc", c);
  const CliRun r = cli({"pc", "--in", (dir / "in.mbpc").string(), "--out",
                     (dir / "out.mbpc").string(), "--voxel", "0.05", "--sor-k", "8",
                     "--sor-std", "1.0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const PointCloud loaded = read_cloud(dir / "in.mbpc");
  const PointCloud expected =
      remove_statistical_outliers(voxel_downsample(loaded, 0.05), 8, 1.0).cloud;
  write_cloud(dir / "expected.mbpc", expected);
  EXPECT_EQ(read_bytes(dir / "out.mbpc"), read_bytes(dir / "expected.mbpc"));
}

TEST(Cli, PlanReportsContract) {
  const CliRun ok = cli({"plan", "--robot", "planar3", "--init", "0,0,0,0.3,0.6,-0.6",
                      "--goal", "1.2,0.3,0.5"});
  EXPECT_EQ(ok.code, kExitOk) << ok.out << ok.err;
  EXPECT_NE(ok.out.find("converged: yes"), std::string::npos) << ok.out;
  const CliRun far = cli({"plan", "--robot", "planar3", "--init", "0,0,0,0.3,0.6,-0.6",
                       "--goal", "4,0,0.5", "--mode", "arm-only"});
  EXPECT_EQ(far.code, kExitPlan);
}

TEST(Cli, GenerateTwiceIsByteIdentical) {
  TempDir dir("cli_gen");
  for (const char* sub : {"a", "b"}) {
    const CliRun r = cli({"generate", "--task", "open-drawer", "--episodes", "2", "--seed",
                       "3", "--out", (dir / sub).string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("kept 2 / attempted 2"), std::string::npos) << r.out;
  }
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), dir / "a");
    EXPECT_EQ(read_bytes(e.path()), read_bytes(dir / "b" / rel)) << rel;
  }
}

TEST(Cli, ConfigErrors) {
  TempDir dir("cli_cfg");
  { std::ofstream(dir / "bad.yaml") << "tasks: [reach-drawer]\nrollouts: [oops\n"; }
  EXPECT_EQ(cli({"bench", "--config", (dir / "bad.yaml").string()}).code, kExitConfig);
  { std::ofstream(dir / "unknown.yaml") << "tasks: [reach-drawer]\nfoo: 1\n"; }
  EXPECT_EQ(cli({"bench", "--config", (dir / "unknown.yaml").string()}).code,
            kExitConfig);
  EXPECT_EQ(cli({"generate", "--task", "nope", "--out", (dir / "x").string()}).code,
            kExitConfig);
}

TEST(Cli, TrainAndEvalRoundTrip) {
  TempDir dir("cli_train");
  ASSERT_EQ(cli({"generate", "--task", "reach-drawer", "--episodes", "3", "--out",
                 (dir / "ds").string()})
                .code,
            kExitOk);
  const CliRun t = cli({"train", "--data", (dir / "ds").string(), "--out",
                     (dir / "ckpt").string(), "--history", (dir / "h.csv").string(),
                     "--steps", "20", "--batch", "8", "--warmup", "2", "--hidden", "16,16"});
  ASSERT_EQ(t.code, kExitOk) << t.err;
  EXPECT_EQ(read_bytes(dir / "h.csv").rfind("step,loss,learning_rate\n", 0), 0u);
  const CliRun e = cli({"eval", "--checkpoint", (dir / "ckpt").string(), "--task",
                     "reach-drawer", "--episodes", "2", "--horizon", "10"});
  EXPECT_EQ(e.code, kExitOk) << e.err;
  EXPECT_NE(e.out.find("rate: "), std::string::npos) << e.out;
  EXPECT_EQ(cli({"eval", "--checkpoint", (dir / "ckpt").string(), "--task",
                 "open-drawer", "--episodes", "1"})
                .code,
            kExitConfig);
}

}  // namespace
}  // namespace mobgen
