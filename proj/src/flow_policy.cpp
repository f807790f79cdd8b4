// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "mobgen/flow_policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "mobgen/errors.hpp"
#include "mobgen/rng.hpp"

namespace mobgen {
namespace fs = std::filesystem;

ActionChunk interpolate(const ActionChunk& A, const ActionChunk& Z,
                        double tau) {
  if (A.rows() != Z.rows() || A.cols() != Z.cols()) {
    throw DimensionMismatch("interpolate: chunk sizes", A.size(), Z.size());
  }
  return tau * A + (1.0 - tau) * Z;
}

// ---------------------------------------------------------------- Mlp

namespace {

Eigen::MatrixXd silu(const Eigen::MatrixXd& z) {
  return z.array() / (1.0 + (-z.array()).exp());
}

Eigen::MatrixXd silu_grad(const Eigen::MatrixXd& z) {
  const Eigen::ArrayXXd s = 1.0 / (1.0 + (-z.array()).exp());
  return (s * (1.0 + z.array() * (1.0 - s))).matrix();
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes, std::uint64_t seed) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("mlp: need >= 2 layers");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) {
      throw std::invalid_argument("mlp: layer sizes must be positive");
    }
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    CounterRng rng(seed, l, Stream::kInit);
    const int in = sizes_[l], out = sizes_[l + 1];
    const double bound = std::sqrt(6.0 / (in + out));
    for (int k = 0; k < in * out; ++k) {
      params_[offsets_[l] + k] = rng.uniform(-bound, bound);
    }
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  return forward(input, nullptr);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Tape* tape) const {
  if (input.rows() != input_size()) {
    throw DimensionMismatch("mlp input", input_size(), input.rows());
  }
  const std::size_t layers = sizes_.size() - 1;
  if (tape) {
    tape->pre.clear();
    tape->post.clear();
    tape->post.push_back(input);
  }
  Eigen::MatrixXd a = input;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const Eigen::Map<const Eigen::MatrixXd> W(params_.data() + offsets_[l], out, in);
    const Eigen::Map<const Eigen::VectorXd> b(
        params_.data() + offsets_[l] + static_cast<std::size_t>(in) * out, out);
    Eigen::MatrixXd z = W * a;
    z.colwise() += b;
    if (l + 1 == layers) {
      a = std::move(z);
    } else {
      a = silu(z);
      if (tape) tape->pre.push_back(std::move(z));
    }
    if (tape && l + 1 < layers) tape->post.push_back(a);
  }
  return a;
}

void Mlp::backward(const Tape& tape, const Eigen::MatrixXd& d_output,
                   Eigen::VectorXd* grad) const {
  if (grad->size() != params_.size()) grad->setZero(params_.size());
  const std::size_t layers = sizes_.size() - 1;
  Eigen::MatrixXd dz = d_output;
  for (std::size_t li = layers; li-- > 0;) {
    const int in = sizes_[li], out = sizes_[li + 1];
    Eigen::Map<Eigen::MatrixXd> dW(grad->data() + offsets_[li], out, in);
    Eigen::Map<Eigen::VectorXd> db(
        grad->data() + offsets_[li] + static_cast<std::size_t>(in) * out, out);
    dW.noalias() += dz * tape.post[li].transpose();
    db += dz.rowwise().sum();
    if (li == 0) break;
    const Eigen::Map<const Eigen::MatrixXd> W(params_.data() + offsets_[li], out, in);
    Eigen::MatrixXd da = W.transpose() * dz;
    dz = da.cwiseProduct(silu_grad(tape.pre[li - 1]));
  }
}

void Mlp::zero_output_layer() {
  const std::size_t l = sizes_.size() - 2;
  const std::size_t n =
      static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
  params_.segment(offsets_[l], n).setZero();
}

// ---------------------------------------------------------- Normalizer

Normalizer Normalizer::Identity(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Normalizer Normalizer::Fit(const Eigen::MatrixXd& rows) {
  Normalizer n;
  const double count = static_cast<double>(std::max<Eigen::Index>(rows.rows(), 1));
  n.mean = rows.colwise().sum().transpose() / count;
  n.std.resize(rows.cols());
  for (int c = 0; c < rows.cols(); ++c) {
    const double var =
        (rows.col(c).array() - n.mean[c]).square().sum() / count;
    const double s = std::sqrt(var);
    n.std[c] = s < 1e-6 ? 1.0 : s;
  }
  return n;
}

Eigen::VectorXd Normalizer::apply(const Eigen::VectorXd& v) const {
  return (v - mean).cwiseQuotient(std);
}

Eigen::VectorXd Normalizer::invert(const Eigen::VectorXd& v) const {
  return v.cwiseProduct(std) + mean;
}

// ------------------------------------------------------------- FlowNet

Eigen::VectorXd time_embedding(double tau, int dim) {
  Eigen::VectorXd e(dim);
  const int half = dim / 2;
  for (int k = 0; k < half; ++k) {
    const double w =
        half > 1 ? std::exp(std::log(100.0) * k / (half - 1)) : 1.0;
    e[2 * k] = std::sin(w * tau);
    e[2 * k + 1] = std::cos(w * tau);
  }
  if (dim % 2) e[dim - 1] = tau;
  return e;
}

Eigen::VectorXd flatten(const ActionChunk& chunk) {
  Eigen::VectorXd v(chunk.size());
  for (int r = 0; r < chunk.rows(); ++r) {
    v.segment(r * chunk.cols(), chunk.cols()) = chunk.row(r).transpose();
  }
  return v;
}

ActionChunk unflatten(const Eigen::VectorXd& v, int horizon, int dim) {
  if (v.size() != horizon * dim) {
    throw DimensionMismatch("unflatten", horizon * dim, v.size());
  }
  ActionChunk m(horizon, dim);
  for (int r = 0; r < horizon; ++r) m.row(r) = v.segment(r * dim, dim).transpose();
  return m;
}

FlowNet::FlowNet(const FlowNetConfig& cfg, std::uint64_t seed)
    : obs_norm(Normalizer::Identity(cfg.obs_dim)),
      act_norm(Normalizer::Identity(cfg.action_dim)),
      cfg_(cfg) {
  if (cfg.horizon < 1 || cfg.action_dim < 1 || cfg.obs_dim < 0 ||
      cfg.time_embed < 1) {
    throw std::invalid_argument("flow net: bad dimensions");
  }
  std::vector<int> sizes = {cfg.time_embed + chunk_size() + cfg.obs_dim};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(chunk_size());
  mlp_ = Mlp(sizes, seed);
}

Eigen::VectorXd FlowNet::input(double tau, const ActionChunk& x,
                               const Eigen::VectorXd& obs) const {
  if (x.rows() != cfg_.horizon || x.cols() != cfg_.action_dim) {
    throw DimensionMismatch("flow net chunk", chunk_size(), x.size());
  }
  if (obs.size() != cfg_.obs_dim) {
    throw DimensionMismatch("flow net observation", cfg_.obs_dim, obs.size());
  }
  Eigen::VectorXd in(mlp_.input_size());
  in << time_embedding(tau, cfg_.time_embed), flatten(x), obs;
  return in;
}

ActionChunk FlowNet::velocity(double tau, const ActionChunk& x,
                              const Eigen::VectorXd& obs) const {
  const Eigen::VectorXd out = mlp_.forward(input(tau, x, obs));
  return unflatten(out, cfg_.horizon, cfg_.action_dim);
}

// -------------------------------------------------------------- losses

namespace {

ActionChunk noise_chunk(int rows, int cols, std::uint64_t seed,
                        std::uint64_t index) {
  CounterRng rng(seed, index, Stream::kFlowNoise);
  ActionChunk z(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) z(r, c) = rng.normal();
  }
  return z;
}

}  // namespace

LossResult fm_loss(const FlowNet& net, const std::vector<Sample>& batch,
                   std::uint64_t seed, int levels) {
  if (batch.empty()) throw std::invalid_argument("fm_loss: empty batch");
  if (levels < 1) throw std::invalid_argument("fm_loss: levels must be >= 1");
  const auto& cfg = net.config();
  const int B = static_cast<int>(batch.size());
  Eigen::MatrixXd inputs(net.mlp().input_size(), B);
  Eigen::MatrixXd targets(net.chunk_size(), B);
  for (int i = 0; i < B; ++i) {
    const ActionChunk z = noise_chunk(cfg.horizon, cfg.action_dim, seed, i);
    CounterRng trng(seed, i, Stream::kFlowTime);
    const double tau =
        static_cast<double>(trng.below(static_cast<std::uint64_t>(levels))) /
        levels;
    inputs.col(i) = net.input(tau, interpolate(batch[i].chunk, z, tau),
                              batch[i].obs);
    targets.col(i) = flatten(batch[i].chunk - z);
  }
  Mlp::Tape tape;
  const Eigen::MatrixXd out = net.mlp().forward(inputs, &tape);
  const Eigen::MatrixXd diff = out - targets;
  LossResult r;
  r.loss = diff.squaredNorm() / B;
  r.grad = Eigen::VectorXd::Zero(net.mlp().param_count());
  net.mlp().backward(tape, (2.0 / B) * diff, &r.grad);
  return r;
}

ActionChunk initial_noise(const FlowNet& net, std::uint64_t seed) {
  return noise_chunk(net.config().horizon, net.config().action_dim, seed, 0);
}

ActionChunk integrate_flow(
    const std::function<ActionChunk(double, const ActionChunk&)>& field,
    const ActionChunk& z, int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("flow: n_steps must be >= 1");
  ActionChunk x = z;
  const double h = 1.0 / n_steps;
  for (int k = 0; k < n_steps; ++k) x += h * field(k * h, x);
  return x;
}

ActionChunk sample_actions(const FlowNet& net, const Eigen::VectorXd& obs,
                           int n_steps, std::uint64_t seed) {
  return integrate_flow(
      [&](double tau, const ActionChunk& x) { return net.velocity(tau, x, obs); },
      initial_noise(net, seed), n_steps);
}

ActionChunk act(const FlowNet& net, const Eigen::VectorXd& raw_obs,
                int n_steps, std::uint64_t seed) {
  ActionChunk c =
      sample_actions(net, net.obs_norm.apply(raw_obs), n_steps, seed);
  for (int r = 0; r < c.rows(); ++r) {
    c.row(r) = net.act_norm.invert(c.row(r).transpose()).transpose();
  }
  return c;
}

// ------------------------------------------------------------ training

void TrainConfig::validate() const {
  if (batch_size < 1 || total_steps < 1) {
    throw ConfigError("train: batch size and steps must be positive");
  }
  if (warmup_steps < 0 || warmup_steps > total_steps) {
    throw ConfigError("train: warmup must lie in [0, total steps]");
  }
  if (!(peak_lr > 0.0) || !(min_lr > 0.0)) {
    throw ConfigError("train: learning rates must be positive");
  }
  if (weight_decay < 0.0 || !(clip_norm > 0.0)) {
    throw ConfigError("train: weight decay >= 0 and clip norm > 0 required");
  }
  if (train_levels < 1 || inference_steps < 1) {
    throw ConfigError("train: flow levels and inference steps must be >= 1");
  }
}

double learning_rate(const TrainConfig& cfg, int step) {
  if (step < cfg.warmup_steps) {
    return cfg.peak_lr * static_cast<double>(step) / cfg.warmup_steps;
  }
  const int span = cfg.total_steps - cfg.warmup_steps;
  if (span <= 0) return cfg.min_lr;
  const double progress =
      std::min(1.0, static_cast<double>(step - cfg.warmup_steps) / span);
  return cfg.min_lr +
         0.5 * (cfg.peak_lr - cfg.min_lr) * (1.0 + std::cos(M_PI * progress));
}

std::vector<bool> draw_sources(std::size_t count, std::uint64_t seed,
                               std::uint64_t step, std::size_t n_sim,
                               std::size_t n_real) {
  if (n_sim == 0 && n_real == 0) {
    throw std::invalid_argument("co_train: both datasets are empty");
  }
  std::vector<bool> sim(count, n_real == 0);
  if (n_sim == 0 || n_real == 0) return sim;
  CounterRng rng(seed, step, Stream::kSourceSelect);
  for (std::size_t i = 0; i < count; ++i) sim[i] = rng.bernoulli(0.5);
  return sim;
}

std::vector<Sample> chunk_samples(const std::vector<Demonstration>& demos,
                                  int horizon) {
  std::vector<Sample> out;
  for (const auto& d : demos) {
    const int steps = d.steps();
    for (int t = 0; t < steps; ++t) {
      Sample s;
      s.obs = d.observations.row(t).transpose().cast<double>();
      s.chunk.resize(horizon, d.actions.cols());
      for (int h = 0; h < horizon; ++h) {
        s.chunk.row(h) = d.actions.row(std::min(t + h, steps - 1)).cast<double>();
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

std::vector<Sample> normalized(const std::vector<Sample>& raw,
                               const FlowNet& net) {
  std::vector<Sample> out;
  out.reserve(raw.size());
  for (const auto& s : raw) {
    Sample n;
    n.obs = net.obs_norm.apply(s.obs);
    n.chunk = s.chunk;
    for (int r = 0; r < n.chunk.rows(); ++r) {
      n.chunk.row(r) =
          net.act_norm.apply(s.chunk.row(r).transpose()).transpose();
    }
    out.push_back(std::move(n));
  }
  return out;
}

}  // namespace

std::vector<TrainRecord> co_train(FlowNet& net, const std::vector<Sample>& sim,
                                  const std::vector<Sample>& real,
                                  const TrainConfig& cfg) {
  cfg.validate();
  if (sim.empty() && real.empty()) {
    throw std::invalid_argument("co_train: both datasets are empty");
  }
  const auto& fc = net.config();
  const std::size_t total = sim.size() + real.size();
  Eigen::MatrixXd obs_rows(total, fc.obs_dim);
  Eigen::MatrixXd act_rows(total * fc.horizon, fc.action_dim);
  std::size_t k = 0;
  for (const auto* set : {&sim, &real}) {
    for (const auto& s : *set) {
      obs_rows.row(k) = s.obs.transpose();
      act_rows.middleRows(k * fc.horizon, fc.horizon) = s.chunk;
      ++k;
    }
  }
  net.obs_norm = Normalizer::Fit(obs_rows);
  net.act_norm = Normalizer::Fit(act_rows);
  const std::vector<Sample> sim_n = normalized(sim, net);
  const std::vector<Sample> real_n = normalized(real, net);

  Eigen::VectorXd& theta = net.mlp().params();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
  std::vector<TrainRecord> history;
  history.reserve(cfg.total_steps);
  std::vector<Sample> batch(cfg.batch_size);
  for (int step = 0; step < cfg.total_steps; ++step) {
    const auto from_sim =
        draw_sources(cfg.batch_size, cfg.seed, step, sim.size(), real.size());
    CounterRng pick(cfg.seed, step, Stream::kBatch);
    for (int i = 0; i < cfg.batch_size; ++i) {
      const auto& pool = from_sim[i] ? sim_n : real_n;
      batch[i] = pool[pick.below(pool.size())];
    }
    LossResult r = fm_loss(net, batch, mix_seed(cfg.seed, step, 1),
                           cfg.train_levels);
    const double norm = r.grad.norm();
    if (norm > cfg.clip_norm) r.grad *= cfg.clip_norm / norm;

    const double lr = learning_rate(cfg, step);
    const double t = step + 1.0;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * r.grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * r.grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    theta -= lr * ((m / c1).array() / ((v / c2).array().sqrt() + cfg.adam_eps))
                      .matrix() +
             lr * cfg.weight_decay * theta;
    history.push_back({step, r.loss, lr});
  }
  return history;
}

void write_history_csv(const fs::path& path,
                       const std::vector<TrainRecord>& history) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,loss,learning_rate\n" << std::setprecision(9);
  for (const auto& h : history) out << h.step << ',' << h.loss << ',' << h.lr << '\n';
}

// ---------------------------------------------------------- checkpoint

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

Eigen::VectorXd load_vector(const fs::path& p, Eigen::Index expected) {
  const ArrayBlock b = read_array(p);
  if (b.dims.size() != 1 || b.dims[0] != expected) {
    throw PayloadMismatch(p.string() + ": unexpected size");
  }
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = b.data[i];
  return v;
}

}  // namespace

void save_checkpoint(const FlowNet& net, const TrainConfig& cfg,
                     const fs::path& dir) {
  fs::create_directories(dir);
  const auto& c = net.config();
  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  out << std::setprecision(17);
  out << "format: mobgen-flow-checkpoint\n"
      << "version: 1\n"
      << "horizon: " << c.horizon << "\n"
      << "action_dim: " << c.action_dim << "\n"
      << "obs_dim: " << c.obs_dim << "\n"
      << "time_embed: " << c.time_embed << "\n"
      << "hidden: " << join_ints(c.hidden) << "\n"
      << "batch_size: " << cfg.batch_size << "\n"
      << "total_steps: " << cfg.total_steps << "\n"
      << "peak_lr: " << cfg.peak_lr << "\n"
      << "min_lr: " << cfg.min_lr << "\n"
      << "warmup_steps: " << cfg.warmup_steps << "\n"
      << "weight_decay: " << cfg.weight_decay << "\n"
      << "clip_norm: " << cfg.clip_norm << "\n"
      << "train_levels: " << cfg.train_levels << "\n"
      << "inference_steps: " << cfg.inference_steps << "\n"
      << "seed: " << cfg.seed << "\n"
      << "params: params.mbrt " << net.mlp().param_count() << "\n";
  write_array(dir / "params.mbrt", ArrayBlock::FromVector(net.mlp().params()));
  write_array(dir / "obs_mean.mbrt", ArrayBlock::FromVector(net.obs_norm.mean));
  write_array(dir / "obs_std.mbrt", ArrayBlock::FromVector(net.obs_norm.std));
  write_array(dir / "act_mean.mbrt", ArrayBlock::FromVector(net.act_norm.mean));
  write_array(dir / "act_std.mbrt", ArrayBlock::FromVector(net.act_norm.std));
}

FlowNet load_checkpoint(const fs::path& dir) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw ManifestError("cannot open checkpoint " + dir.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    kv[line.substr(0, colon)] = line.substr(colon + 2);
  }
  if (kv["format"] != "mobgen-flow-checkpoint") {
    throw BadMagic("not a flow checkpoint: " + dir.string());
  }
  if (kv["version"] != "1") throw VersionMismatch("checkpoint version");
  FlowNetConfig c;
  try {
    c.horizon = std::stoi(kv.at("horizon"));
    c.action_dim = std::stoi(kv.at("action_dim"));
    c.obs_dim = std::stoi(kv.at("obs_dim"));
    c.time_embed = std::stoi(kv.at("time_embed"));
    c.hidden.clear();
    std::stringstream ss(kv.at("hidden"));
    for (std::string tok; std::getline(ss, tok, ',');) c.hidden.push_back(std::stoi(tok));
  } catch (const std::exception& e) {
    throw ManifestError(std::string("checkpoint manifest: ") + e.what());
  }
  FlowNet net(c, 0);
  net.mlp().params() =
      load_vector(dir / "params.mbrt", net.mlp().params().size());
  net.obs_norm.mean = load_vector(dir / "obs_mean.mbrt", c.obs_dim);
  net.obs_norm.std = load_vector(dir / "obs_std.mbrt", c.obs_dim);
  net.act_norm.mean = load_vector(dir / "act_mean.mbrt", c.action_dim);
  net.act_norm.std = load_vector(dir / "act_std.mbrt", c.action_dim);
  return net;
}

// ------------------------------------------------------------- encoder

Eigen::VectorXd PooledCloudEncoder::encode(const PointCloud& cloud) const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(feature_size());
  const Vec3 extent = workspace.max - workspace.min;
  Vec3 centroid = Vec3::Zero();
  std::size_t inside = 0;
  for (const Vec3& p : cloud.points) {
    if (!workspace.contains(p)) continue;
    const Vec3 rel = (p - workspace.min).cwiseQuotient(extent);
    const int ix = std::min(nx - 1, static_cast<int>(rel.x() * nx));
    const int iy = std::min(ny - 1, static_cast<int>(rel.y() * ny));
    const int iz = std::min(nz - 1, static_cast<int>(rel.z() * nz));
    f[(ix * ny + iy) * nz + iz] += 1.0;
    centroid += rel;
    ++inside;
  }
  if (inside > 0) {
    f.head(nx * ny * nz) /= static_cast<double>(inside);
    f.tail<3>() = 2.0 * centroid / static_cast<double>(inside) -
                  Vec3::Ones();
  }
  return f;
}

// ------------------------------------------------------------ rollouts

ActionChunk FlowPolicy::act(const Eigen::VectorXd& obs, std::uint64_t episode,
                            int call) const {
  return mobgen::act(net_, obs, n_steps_,
                     mix_seed(seed_, episode, static_cast<std::uint64_t>(call)));
}

ReplayPolicy::ReplayPolicy(std::vector<Eigen::MatrixXd> actions, int horizon,
                           int executed)
    : actions_(std::move(actions)), horizon_(horizon), executed_(executed) {}

ActionChunk ReplayPolicy::act(const Eigen::VectorXd&, std::uint64_t episode,
                              int call) const {
  const Eigen::MatrixXd& a = actions_.at(episode % actions_.size());
  ActionChunk c(horizon_, a.cols());
  for (int h = 0; h < horizon_; ++h) {
    const long row = std::min<long>(static_cast<long>(call) * executed_ + h,
                                    a.rows() - 1);
    c.row(h) = a.row(row);
  }
  return c;
}

double kinematic_rollout_eval(const ChunkPolicy& policy, RolloutEnv& env,
                              int chunk_horizon, const RolloutOptions& opts) {
  if (opts.episodes < 1) throw std::invalid_argument("rollout: episodes < 1");
  const int executed =
      opts.executed > 0 ? std::min(opts.executed, chunk_horizon)
                        : std::max(1, chunk_horizon / 2);
  int successes = 0;
  for (int e = 0; e < opts.episodes; ++e) {
    const std::uint64_t episode = opts.first_episode + e;
    env.reset(episode);
    int steps = 0, call = 0;
    bool done = env.success();
    while (!done && steps < opts.horizon) {
      const ActionChunk chunk = policy.act(env.observe(), episode, call++);
      for (int r = 0; r < executed && steps < opts.horizon; ++r, ++steps) {
        env.step(chunk.row(r).transpose());
        if (env.success()) {
          done = true;
          break;
        }
      }
    }
    if (done) ++successes;
  }
  return static_cast<double>(successes) / opts.episodes;
}

}  // namespace mobgen
