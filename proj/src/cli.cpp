// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "mobgen/errors.hpp"
#include "mobgen/harness.hpp"
#include "mobgen/pointcloud.hpp"
#include "mobgen/topp.hpp"

namespace mobgen {
namespace fs = std::filesystem;

namespace {

class BadArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw BadArgument("not a number: '" + tok + "'");
    }
  }
  return out;
}

Eigen::VectorXd per_joint(const std::vector<double>& v, int dofs,
                          const std::string& what) {
  if (v.size() == 1) return Eigen::VectorXd::Constant(dofs, v[0]);
  if (static_cast<int>(v.size()) != dofs) {
    throw BadArgument(what + ": expected 1 or " + std::to_string(dofs) + " values");
  }
  return to_vector(v);
}

JointGroup group_of(const std::string& s) {
  if (s == "whole-body") return JointGroup::kWholeBody;
  if (s == "base-only") return JointGroup::kBaseOnly;
  if (s == "arm-only") return JointGroup::kArmOnly;
  throw BadArgument("unknown mode '" + s + "'");
}

struct GenerateArgs {
  GenerateOptions opts;
};

struct PlanArgs {
  std::string robot = "mm_scara";
  std::vector<double> init;
  std::vector<double> goal;
  int T = 10;
  std::string mode = "whole-body";
  CostWeights weights;
  double w_smooth_base = 4.0;
  double w_smooth_arm = 1.0;
  std::vector<std::string> obstacles;
  int max_iters = 500;
  std::string out;
};

struct RetimeArgs {
  std::string in;
  std::string robot;
  std::vector<double> v_max;
  std::vector<double> a_max;
  int grid = 0;
  double dt = 0.0;
  std::string out;
};

struct PcArgs {
  std::string in;
  std::string out;
  std::vector<double> crop;
  double voxel = 0.0;
  int sor_k = 0;
  double sor_std = 1.0;
};

struct TrainArgs {
  std::string data;
  std::string real;
  std::string out;
  std::string history;
  TrainConfig cfg;
  FlowNetConfig net;
};

struct EvalArgs {
  std::string checkpoint;
  std::string task;
  RolloutOptions rollout;
  int inference_steps = 10;
  std::uint64_t seed = 0;
};

struct BenchArgs {
  std::string config;
  std::string out;
};

int do_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  const Task task = load_task(a.opts.task);
  const GenerateReport r = generate_dataset(task, a.opts);
  for (const auto& f : r.failures) err << "dropped " << f << "\n";
  out << "kept " << r.kept << " / attempted " << r.attempted << "\n";
  return kExitOk;
}

int do_plan(const PlanArgs& a, std::ostream& out) {
  const RobotModel model = load_robot(a.robot);
  PlanRequest req;
  req.model = &model;
  req.x_init = a.init.empty() ? model.clamp(Configuration::Zero(model.dofs()))
                              : per_joint(a.init, model.dofs(), "--init");
  if (a.goal.size() != 3 && a.goal.size() != 6) {
    throw BadArgument("--goal: expected x,y,z or x,y,z,roll,pitch,yaw");
  }
  // Position-only goals keep the start orientation.
  Quat rot = model.forward_kinematics(req.x_init).rotation();
  if (a.goal.size() == 6) {
    rot = Quat(Eigen::AngleAxisd(a.goal[5], Vec3::UnitZ()) *
               Eigen::AngleAxisd(a.goal[4], Vec3::UnitY()) *
               Eigen::AngleAxisd(a.goal[3], Vec3::UnitX()));
  }
  req.goal = Pose(rot, Vec3(a.goal[0], a.goal[1], a.goal[2]));
  req.T = a.T;
  req.mode = group_of(a.mode);
  req.weights = a.weights;
  req.weights.w_smooth = Eigen::VectorXd::Constant(model.dofs(), a.w_smooth_arm);
  req.weights.w_smooth.head(RobotModel::kBaseDofs).setConstant(a.w_smooth_base);
  req.solver.max_iters = a.max_iters;
  for (const auto& s : a.obstacles) {
    const auto v = split_doubles(s);
    if (v.size() != 4) throw BadArgument("--obstacle: expected x,y,z,radius");
    req.obstacles.push_back({Vec3(v[0], v[1], v[2]), v[3]});
  }
  const WholeBodyTrajectory traj = plan(req);
  out << "converged: " << (traj.converged ? "yes" : "no") << "\n"
      << "iterations: " << traj.iterations << "\n"
      << "cost: " << fmt(traj.final_cost) << "\n"
      << "position_error: " << fmt(traj.terminal_error.position) << "\n"
      << "rotation_error: " << fmt(traj.terminal_error.rotation) << "\n"
      << "min_clearance: " << fmt(traj.min_clearance) << "\n";
  if (!a.out.empty()) write_array(fs::path(a.out), ArrayBlock::FromMatrix(traj.matrix()));
  return traj.converged ? kExitOk : kExitPlan;
}

int do_retime(const RetimeArgs& a, std::ostream& out) {
  const Eigen::MatrixXd wps = read_array(fs::path(a.in)).to_matrix().cast<double>();
  const int dofs = static_cast<int>(wps.cols());
  Eigen::VectorXd v_max, a_max;
  if (!a.robot.empty()) {
    const RobotModel model = load_robot(a.robot);
    if (model.dofs() != dofs) throw DimensionMismatch("--robot dofs", dofs, model.dofs());
    v_max = model.v_max();
    a_max = model.a_max();
  }
  if (!a.v_max.empty()) v_max = per_joint(a.v_max, dofs, "--v-max");
  if (!a.a_max.empty()) a_max = per_joint(a.a_max, dofs, "--a-max");
  if (v_max.size() == 0 || a_max.size() == 0) {
    throw BadArgument("give --robot or both --v-max and --a-max");
  }
  std::vector<Configuration> rows;
  for (int r = 0; r < wps.rows(); ++r) rows.push_back(wps.row(r).transpose());
  const GeometricPath path = a.grid > 0 ? GeometricPath::Resampled(rows, a.grid)
                                        : GeometricPath::FromWaypoints(wps);
  const TimedTrajectory timed = retime(path, v_max, a_max);
  out << "duration: " << fmt(timed.duration()) << " s\n";
  if (!a.out.empty()) {
    Eigen::MatrixXd table;
    if (a.dt > 0.0) {
      const auto samples = sample_timed(timed, a.dt);
      table.resize(static_cast<Eigen::Index>(samples.size()), 1 + 2 * dofs);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        table(i, 0) = samples[i].t;
        table.row(i).segment(1, dofs) = samples[i].q.transpose();
        table.row(i).segment(1 + dofs, dofs) = samples[i].qd.transpose();
      }
      out << "samples: " << samples.size() << "\n";
    } else {
      const int n = static_cast<int>(timed.times.size());
      table.resize(n, 1 + 2 * dofs);
      for (int i = 0; i < n; ++i) {
        table(i, 0) = timed.times[i];
        table.row(i).segment(1, dofs) = timed.q.row(i);
        table.row(i).segment(1 + dofs, dofs) = timed.qd.row(i);
      }
    }
    write_array(fs::path(a.out), ArrayBlock::FromMatrix(table));
  }
  return kExitOk;
}

int do_pc(const PcArgs& a, std::ostream& out) {
  PointCloud cloud = read_cloud(a.in);
  out << "input: " << cloud.points.size() << "\n";
  if (!a.crop.empty()) {
    if (a.crop.size() != 6) throw BadArgument("--crop: expected 6 values");
    Box box;
    box.min = Vec3(a.crop[0], a.crop[1], a.crop[2]);
    box.max = Vec3(a.crop[3], a.crop[4], a.crop[5]);
    cloud = crop_foreground(cloud, box);
    out << "cropped: " << cloud.points.size() << "\n";
  }
  if (a.voxel > 0.0) {
    cloud = voxel_downsample(cloud, a.voxel);
    out << "voxelized: " << cloud.points.size() << "\n";
  }
  if (a.sor_k > 0) {
    const OutlierResult r = remove_statistical_outliers(cloud, a.sor_k, a.sor_std);
    cloud = r.cloud;
    out << "outliers removed: " << r.removed << "\n";
  }
  write_cloud(a.out, cloud);
  out << "output: " << cloud.points.size() << "\n";
  return kExitOk;
}

int do_train(TrainArgs a, std::ostream& out) {
  const DatasetSummary sim = filter_and_assemble(read_dataset(a.data));
  DatasetSummary real;
  if (!a.real.empty()) real = filter_and_assemble(read_dataset(a.real));
  if (sim.kept.empty() && real.kept.empty()) {
    throw ConfigError("train: no successful demonstrations found");
  }
  const Demonstration& first = sim.kept.empty() ? real.kept.front() : sim.kept.front();
  a.net.obs_dim = static_cast<int>(first.observations.cols());
  a.net.action_dim = static_cast<int>(first.actions.cols());
  FlowNet net(a.net, a.cfg.seed);
  const auto history = co_train(net, chunk_samples(sim.kept, a.net.horizon),
                                chunk_samples(real.kept, a.net.horizon), a.cfg);
  save_checkpoint(net, a.cfg, a.out);
  if (!a.history.empty()) write_history_csv(a.history, history);
  out << "demos: " << sim.kept.size() << " sim, " << real.kept.size() << " real\n"
      << "final_loss: " << fmt(history.back().loss) << "\n";
  return kExitOk;
}

int do_eval(const EvalArgs& a, std::ostream& out) {
  const FlowNet net = load_checkpoint(a.checkpoint);
  const Task task = load_task(a.task);
  TaskEnv env(task, a.seed);
  if (net.config().obs_dim != env.obs_dim() ||
      net.config().action_dim != env.action_dim()) {
    throw ConfigError("eval: checkpoint dimensions do not match the task");
  }
  const FlowPolicy policy(net, a.inference_steps, a.seed);
  const double rate =
      kinematic_rollout_eval(policy, env, net.config().horizon, a.rollout);
  out << "successes: " << std::lround(rate * a.rollout.episodes) << " / "
      << a.rollout.episodes << "\n"
      << "rate: " << fmt(rate) << "\n";
  return kExitOk;
}

int do_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.config);
  if (!in) throw ConfigError("cannot open bench config " + a.config);
  std::stringstream ss;
  ss << in.rdbuf();
  const BenchConfig cfg = BenchConfig::FromYaml(ss.str());
  const auto rows = run_bench(cfg, &err);
  if (!a.out.empty()) write_bench_csv(a.out, rows);
  out << "task,demos,rollouts,successes,rate\n";
  for (const auto& r : rows) {
    out << r.task << ',' << r.demos << ',' << r.rollouts << ',' << r.successes
        << ',' << fmt(r.rate) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Mobile manipulation demonstration generation and policy training"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a validated demonstration dataset");
  g->add_option("--task", gen.opts.task, "Built-in task name or task YAML")->required();
  g->add_option("--episodes", gen.opts.episodes, "Episodes to attempt");
  g->add_option("--seed", gen.opts.seed, "Randomization seed");
  g->add_option("--first-episode", gen.opts.first_episode, "Index of the first episode");
  g->add_option("--out", gen.opts.out, "Dataset directory")->required();
  g->add_option("--workers", gen.opts.workers, "Parallel episode workers")
      ->check(CLI::PositiveNumber);

  PlanArgs pl;
  auto* p = app.add_subcommand("plan", "Whole-body trajectory optimization to a goal pose");
  p->add_option("--robot", pl.robot, "Built-in robot name or robot YAML");
  p->add_option("--init", pl.init, "Start configuration")->delimiter(',');
  p->add_option("--goal", pl.goal, "x,y,z[,roll,pitch,yaw]")->delimiter(',')->required();
  p->add_option("--T", pl.T, "Waypoints")->check(CLI::Range(2, 1000));
  p->add_option("--mode", pl.mode, "whole-body, base-only or arm-only");
  p->add_option("--w-pos", pl.weights.w_pos);
  p->add_option("--w-rot", pl.weights.w_rot);
  p->add_option("--w-smooth-base", pl.w_smooth_base);
  p->add_option("--w-smooth-arm", pl.w_smooth_arm);
  p->add_option("--w-yaw", pl.weights.w_yaw);
  p->add_option("--w-col", pl.weights.w_col);
  p->add_option("--d-safe", pl.weights.d_safe);
  p->add_option("--obstacle", pl.obstacles, "x,y,z,radius (repeatable)");
  p->add_option("--max-iters", pl.max_iters)->check(CLI::PositiveNumber);
  p->add_option("--out", pl.out, "Waypoint array output (.mbrt)");

  RetimeArgs rt;
  auto* r = app.add_subcommand("retime", "Time-optimal retiming of a waypoint path");
  r->add_option("--in", rt.in, "Waypoint array (.mbrt), one row per waypoint")->required();
  r->add_option("--robot", rt.robot, "Take limits from a robot");
  r->add_option("--v-max", rt.v_max, "Velocity limits")->delimiter(',');
  r->add_option("--a-max", rt.a_max, "Acceleration limits")->delimiter(',');
  r->add_option("--grid", rt.grid, "Resample to this many grid points");
  r->add_option("--dt", rt.dt, "Sampling period for --out");
  r->add_option("--out", rt.out, "Timed rows [t, q, qd] (.mbrt)");

  PcArgs pc;
  auto* c = app.add_subcommand("pc", "Point-cloud preprocessing");
  c->add_option("--in", pc.in, "Input cloud (.mbpc)")->required();
  c->add_option("--out", pc.out, "Output cloud (.mbpc)")->required();
  c->add_option("--crop", pc.crop, "x0,y0,z0,x1,y1,z1")->delimiter(',');
  c->add_option("--voxel", pc.voxel, "Voxel size in meters (0 disables)");
  c->add_option("--sor-k", pc.sor_k, "Outlier-removal neighbours (0 disables)");
  c->add_option("--sor-std", pc.sor_std, "Outlier-removal std multiplier");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a flow-matching policy");
  t->add_option("--data", tr.data, "Simulated dataset directory")->required();
  t->add_option("--real", tr.real, "Real dataset directory (co-training)");
  t->add_option("--out", tr.out, "Checkpoint directory")->required();
  t->add_option("--history", tr.history, "Loss history CSV");
  t->add_option("--steps", tr.cfg.total_steps);
  t->add_option("--batch", tr.cfg.batch_size);
  t->add_option("--peak-lr", tr.cfg.peak_lr);
  t->add_option("--min-lr", tr.cfg.min_lr);
  t->add_option("--warmup", tr.cfg.warmup_steps);
  t->add_option("--weight-decay", tr.cfg.weight_decay);
  t->add_option("--clip", tr.cfg.clip_norm);
  t->add_option("--levels", tr.cfg.train_levels);
  t->add_option("--inference-steps", tr.cfg.inference_steps);
  t->add_option("--seed", tr.cfg.seed);
  t->add_option("--horizon", tr.net.horizon, "Action chunk length");
  t->add_option("--hidden", tr.net.hidden, "Hidden layer widths")->delimiter(',');

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Closed-loop kinematic evaluation of a policy");
  e->add_option("--checkpoint", ev.checkpoint)->required();
  e->add_option("--task", ev.task)->required();
  e->add_option("--episodes", ev.rollout.episodes)->check(CLI::PositiveNumber);
  e->add_option("--horizon", ev.rollout.horizon)->check(CLI::PositiveNumber);
  e->add_option("--executed", ev.rollout.executed);
  e->add_option("--inference-steps", ev.inference_steps)->check(CLI::PositiveNumber);
  e->add_option("--seed", ev.seed);
  ev.rollout.first_episode = kEvalEpisodeBase;

  BenchArgs be;
  auto* b = app.add_subcommand("bench", "Demo-count sweep: generate, train, evaluate");
  b->add_option("--config", be.config, "Bench YAML")->required();
  b->add_option("--out", be.out, "CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n" << "run with --help for usage\n";
    return kExitBadArgs;
  }

  try {
    if (*g) return do_generate(gen, out, err);
    if (*p) return do_plan(pl, out);
    if (*r) return do_retime(rt, out);
    if (*c) return do_pc(pc, out);
    if (*t) return do_train(tr, out);
    if (*e) return do_eval(ev, out);
    if (*b) return do_bench(be, out, err);
  } catch (const DegeneratePath& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitPlan;
  } catch (const InfeasiblePath& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitPlan;
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const TaskError& ex) {
    err << "task error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const YAML::Exception& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& ex) {
    err << "format error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const IoError& ex) {
    err << "io error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& ex) {
    err << "io error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitBadArgs;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace mobgen
