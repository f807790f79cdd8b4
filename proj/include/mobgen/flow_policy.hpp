// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Toy-scale flow-matching policy. A small MLP predicts the velocity field
// v(tau, X_tau, o) that carries Gaussian noise Z to an action chunk A along
// X_tau = tau A + (1 - tau) Z; inference integrates it with a few Euler
// steps.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mobgen/dataset_io.hpp"
#include "mobgen/pointcloud.hpp"

namespace mobgen {

/// H x D: H consecutive actions of dimension D.
using ActionChunk = Eigen::MatrixXd;

ActionChunk interpolate(const ActionChunk& A, const ActionChunk& Z, double tau);

/// Multilayer perceptron with SiLU hidden activations and a linear output.
/// All parameters live in one flat vector (per layer: W column-major, then
/// b).
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> sizes, std::uint64_t seed);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  /// Columns are batch elements.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;

  struct Tape {
    std::vector<Eigen::MatrixXd> pre;   // pre-activations per layer
    std::vector<Eigen::MatrixXd> post;  // activations, post[0] = input
  };
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Tape* tape) const;
  /// Accumulates d(loss)/d(params) into grad given d(loss)/d(output).
  void backward(const Tape& tape, const Eigen::MatrixXd& d_output,
                Eigen::VectorXd* grad) const;

  /// Zeroes the weights and bias of the output layer.
  void zero_output_layer();

 private:
  std::vector<int> sizes_;
  Eigen::VectorXd params_;
  std::vector<std::size_t> offsets_;  // start of W for each layer
};

struct Normalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  static Normalizer Identity(int dim);
  /// Per-column statistics over the rows of data; std floored at 1e-6 and
  /// replaced by 1 for constant columns.
  static Normalizer Fit(const Eigen::MatrixXd& rows);
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& v) const;
};

struct FlowNetConfig {
  int horizon = 8;        // H
  int action_dim = 2;     // D
  int obs_dim = 2;
  int time_embed = 16;
  std::vector<int> hidden = {128, 128, 128};
};

/// Sinusoidal features of tau, `dim` entries (sin/cos pairs).
Eigen::VectorXd time_embedding(double tau, int dim);

class FlowNet {
 public:
  FlowNet() = default;
  FlowNet(const FlowNetConfig& cfg, std::uint64_t seed);

  const FlowNetConfig& config() const { return cfg_; }
  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }
  int chunk_size() const { return cfg_.horizon * cfg_.action_dim; }

  /// Network input for one example: [embed(tau), vec(X) row-major, obs].
  Eigen::VectorXd input(double tau, const ActionChunk& x,
                        const Eigen::VectorXd& obs) const;
  ActionChunk velocity(double tau, const ActionChunk& x,
                       const Eigen::VectorXd& obs) const;

  // Dataset statistics; the net works in normalized coordinates.
  Normalizer obs_norm;
  Normalizer act_norm;

 private:
  FlowNetConfig cfg_;
  Mlp mlp_;
};

Eigen::VectorXd flatten(const ActionChunk& chunk);  // row-major
ActionChunk unflatten(const Eigen::VectorXd& v, int horizon, int dim);

/// One training example in normalized coordinates.
struct Sample {
  Eigen::VectorXd obs;
  ActionChunk chunk;
};

struct LossResult {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

/// Discretization of tau used in training: tau in {0, 1/L, ..., (L-1)/L}.
inline constexpr int kTrainFlowLevels = 100;

/// Mean over the batch of |v(tau, X_tau, o) - (A - Z)|^2 with Z ~ N(0, I)
/// and tau drawn from the training grid, keyed by (seed, example index).
LossResult fm_loss(const FlowNet& net, const std::vector<Sample>& batch,
                   std::uint64_t seed, int levels = kTrainFlowLevels);

/// Noise chunk used by sample_actions for a given seed.
ActionChunk initial_noise(const FlowNet& net, std::uint64_t seed);

/// Euler integration X_{k+1} = X_k + v(k/n, X_k, o) / n from X_0 = Z, in
/// normalized coordinates.
ActionChunk integrate_flow(
    const std::function<ActionChunk(double, const ActionChunk&)>& field,
    const ActionChunk& z, int n_steps);
ActionChunk sample_actions(const FlowNet& net, const Eigen::VectorXd& obs,
                           int n_steps, std::uint64_t seed);

/// Raw observation in, denormalized action chunk out.
ActionChunk act(const FlowNet& net, const Eigen::VectorXd& raw_obs,
                int n_steps, std::uint64_t seed);

struct TrainConfig {
  int batch_size = 64;
  int total_steps = 4000;
  double peak_lr = 1e-4;
  double min_lr = 1e-6;
  int warmup_steps = 500;
  double weight_decay = 1e-6;
  double clip_norm = 10.0;
  int train_levels = kTrainFlowLevels;
  int inference_steps = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Linear warmup to peak_lr, then cosine decay reaching min_lr at
/// total_steps.
double learning_rate(const TrainConfig& cfg, int step);

struct TrainRecord {
  int step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

/// Source of each batch element: true = sim. Each draw picks sim or real
/// with probability 0.5 when both exist.
std::vector<bool> draw_sources(std::size_t count, std::uint64_t seed,
                               std::uint64_t step, std::size_t n_sim,
                               std::size_t n_real);

/// Training examples from demonstrations: the observation at step t and
/// actions t..t+H-1 (the last action repeated past the end). Raw units.
std::vector<Sample> chunk_samples(const std::vector<Demonstration>& demos,
                                  int horizon);

/// Fits the normalizers on sim + real, then trains with AdamW (decoupled
/// weight decay), warmup+cosine schedule and global-norm clipping.
std::vector<TrainRecord> co_train(FlowNet& net, const std::vector<Sample>& sim,
                                  const std::vector<Sample>& real,
                                  const TrainConfig& cfg);

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<TrainRecord>& history);

/// Checkpoint directory: manifest.txt plus MBRT arrays.
void save_checkpoint(const FlowNet& net, const TrainConfig& cfg,
                     const std::filesystem::path& dir);
FlowNet load_checkpoint(const std::filesystem::path& dir);

/// Fixed-size summary of a cloud inside a workspace box: occupancy fraction
/// of an nx x ny x nz grid followed by the normalized centroid.
struct PooledCloudEncoder {
  Box workspace;
  int nx = 4, ny = 4, nz = 2;

  int feature_size() const { return nx * ny * nz + 3; }
  Eigen::VectorXd encode(const PointCloud& cloud) const;
};

/// Closed-loop kinematic environment used for rollouts.
class RolloutEnv {
 public:
  virtual ~RolloutEnv() = default;
  virtual void reset(std::uint64_t episode) = 0;
  virtual Eigen::VectorXd observe() const = 0;
  virtual void step(const Eigen::VectorXd& action) = 0;
  virtual bool success() const = 0;
};

class ChunkPolicy {
 public:
  virtual ~ChunkPolicy() = default;
  /// `call` counts inference calls within the episode.
  virtual ActionChunk act(const Eigen::VectorXd& obs, std::uint64_t episode,
                          int call) const = 0;
};

class FlowPolicy : public ChunkPolicy {
 public:
  FlowPolicy(const FlowNet& net, int n_steps, std::uint64_t seed)
      : net_(net), n_steps_(n_steps), seed_(seed) {}
  ActionChunk act(const Eigen::VectorXd& obs, std::uint64_t episode,
                  int call) const override;

 private:
  const FlowNet& net_;
  int n_steps_;
  std::uint64_t seed_;
};

/// Replays recorded action rows, one demonstration per episode index.
class ReplayPolicy : public ChunkPolicy {
 public:
  ReplayPolicy(std::vector<Eigen::MatrixXd> actions, int horizon,
               int executed);
  ActionChunk act(const Eigen::VectorXd& obs, std::uint64_t episode,
                  int call) const override;

 private:
  std::vector<Eigen::MatrixXd> actions_;
  int horizon_;
  int executed_;
};

struct RolloutOptions {
  int episodes = 30;
  int horizon = 200;         // control steps per episode
  int executed = -1;         // steps executed per chunk; -1 means H/2
  std::uint64_t first_episode = 0;
};

/// Fraction of episodes whose success predicate holds at the end of the
/// rollout (or earlier, which ends the episode).
double kinematic_rollout_eval(const ChunkPolicy& policy, RolloutEnv& env,
                              int chunk_horizon, const RolloutOptions& opts);

}  // namespace mobgen
