// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "mobgen/wholebody_opt.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "mobgen/errors.hpp"

namespace mobgen {
namespace {

Eigen::VectorXd smooth_weights(const CostWeights& w, int dofs) {
  if (w.w_smooth.size() == dofs) return w.w_smooth;
  Eigen::VectorXd out = Eigen::VectorXd::Ones(dofs);
  out.head(RobotModel::kBaseDofs).setConstant(4.0);
  return out;
}

double yaw_reference(const PlanRequest& req) {
  return req.weights.yaw_ref.value_or(req.x_init[RobotModel::kYawIndex]);
}

void check_request(const TrajectoryMatrix& x, const PlanRequest& req) {
  if (req.model == nullptr) throw std::invalid_argument("plan: model is null");
  const int n = req.model->dofs();
  if (x.cols() != n) throw DimensionMismatch("trajectory columns", n, x.cols());
  if (x.rows() < 1) throw DimensionMismatch("trajectory rows", 1, x.rows());
  if (req.x_init.size() != n) {
    throw DimensionMismatch("x_init size", n, req.x_init.size());
  }
}

// Gauss-Newton approximation of the cost Hessian; every term is a weighted
// sum of squared residuals. Index t * n + j.
Eigen::MatrixXd gauss_newton_hessian(const TrajectoryMatrix& x,
                                     const PlanRequest& req) {
  const RobotModel& model = *req.model;
  const CostWeights& w = req.weights;
  const int T = static_cast<int>(x.rows());
  const int n = model.dofs();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(T * n, T * n);

  const Jacobian J = model.jacobian(x.row(T - 1).transpose());
  H.block((T - 1) * n, (T - 1) * n, n, n) +=
      2.0 * w.w_pos * J.bottomRows<3>().transpose() * J.bottomRows<3>() +
      2.0 * w.w_rot * J.topRows<3>().transpose() * J.topRows<3>();

  const Eigen::VectorXd ws = smooth_weights(w, n);
  for (int t = 0; t + 1 < T; ++t) {
    for (int j = 0; j < n; ++j) {
      const int a = t * n + j;
      const int b = a + n;
      H(a, a) += 2.0 * ws[j];
      H(b, b) += 2.0 * ws[j];
      H(a, b) -= 2.0 * ws[j];
      H(b, a) -= 2.0 * ws[j];
    }
  }
  for (int t = 0; t < T; ++t) {
    const int k = t * n + RobotModel::kYawIndex;
    H(k, k) += 2.0 * w.w_yaw;
  }

  if (w.w_col > 0.0 && !req.obstacles.empty() &&
      !model.collision_spheres().empty()) {
    for (int t = 0; t < T; ++t) {
      const auto frames = model.link_frames(x.row(t).transpose());
      const auto centers = model.sphere_centers(frames);
      for (std::size_t s = 0; s < centers.size(); ++s) {
        const auto& sphere = model.collision_spheres()[s];
        for (const auto& o : req.obstacles) {
          const Vec3 diff = centers[s] - o.center;
          const double norm = diff.norm();
          const double dist = norm - sphere.radius - o.radius;
          if (w.d_safe - dist <= 0.0 || norm < 1e-12) continue;
          const Eigen::RowVectorXd a =
              (diff.transpose() / norm) *
              model.point_jacobian(frames, sphere.link, centers[s]);
          H.block(t * n, t * n, n, n) += 2.0 * w.w_col * a.transpose() * a;
        }
      }
    }
  }
  return H;
}

}  // namespace

void CostWeights::validate(int dofs) const {
  if (w_pos < 0 || w_rot < 0 || w_yaw < 0 || w_col < 0) {
    throw std::invalid_argument("cost weights must be non-negative");
  }
  if (w_smooth.size() != 0 && w_smooth.size() != dofs) {
    throw DimensionMismatch("w_smooth size", dofs, w_smooth.size());
  }
  if (w_smooth.size() != 0 && (w_smooth.array() < 0.0).any()) {
    throw std::invalid_argument("smoothness weights must be non-negative");
  }
  if (!(d_safe > 0.0)) throw std::invalid_argument("d_safe must be positive");
}

TrajectoryMatrix WholeBodyTrajectory::matrix() const {
  if (waypoints.empty()) return {};
  TrajectoryMatrix m(waypoints.size(), waypoints.front().size());
  for (std::size_t t = 0; t < waypoints.size(); ++t) {
    m.row(t) = waypoints[t].transpose();
  }
  return m;
}

CostBreakdown cost_terms(const TrajectoryMatrix& x, const PlanRequest& req) {
  check_request(x, req);
  const RobotModel& model = *req.model;
  const CostWeights& w = req.weights;
  const int T = static_cast<int>(x.rows());
  CostBreakdown c;

  const Pose eef = model.forward_kinematics(x.row(T - 1).transpose());
  const PoseError e = pose_error(eef, req.goal);
  c.terminal = w.w_pos * e.position * e.position +
               w.w_rot * e.rotation * e.rotation;

  const Eigen::VectorXd ws = smooth_weights(w, model.dofs());
  for (int t = 0; t + 1 < T; ++t) {
    const Eigen::VectorXd d = (x.row(t + 1) - x.row(t)).transpose();
    c.smooth += d.cwiseProduct(d).dot(ws);
  }

  const double yaw_ref = yaw_reference(req);
  for (int t = 0; t < T; ++t) {
    const double dy = x(t, RobotModel::kYawIndex) - yaw_ref;
    c.yaw += w.w_yaw * dy * dy;
  }

  if (w.w_col > 0.0 && !req.obstacles.empty() &&
      !model.collision_spheres().empty()) {
    for (int t = 0; t < T; ++t) {
      const auto centers =
          model.sphere_centers(model.link_frames(x.row(t).transpose()));
      for (std::size_t s = 0; s < centers.size(); ++s) {
        const double rs = model.collision_spheres()[s].radius;
        for (const auto& o : req.obstacles) {
          const double dist = (centers[s] - o.center).norm() - rs - o.radius;
          const double h = std::max(0.0, w.d_safe - dist);
          c.collision += w.w_col * h * h;
        }
      }
    }
  }
  return c;
}

double total_cost(const TrajectoryMatrix& x, const PlanRequest& req) {
  return cost_terms(x, req).total();
}

TrajectoryMatrix cost_gradient(const TrajectoryMatrix& x,
                               const PlanRequest& req) {
  check_request(x, req);
  const RobotModel& model = *req.model;
  const CostWeights& w = req.weights;
  const int T = static_cast<int>(x.rows());
  const int n = model.dofs();
  TrajectoryMatrix g = TrajectoryMatrix::Zero(T, n);

  // Terminal pose term. With phi = Log(R_goal^T R),
  // d|phi|^2 = 2 (R phi) . d(omega) for a world-frame rotation d(omega).
  {
    const Configuration qT = x.row(T - 1).transpose();
    const Pose eef = model.forward_kinematics(qT);
    const Jacobian J = model.jacobian(qT);
    const Vec3 dp = eef.translation() - req.goal.translation();
    const Vec3 phi =
        rotation_log(req.goal.rotation().conjugate() * eef.rotation());
    const Vec3 phi_world = eef.rotation() * phi;
    g.row(T - 1) += (2.0 * w.w_pos * J.bottomRows<3>().transpose() * dp +
                     2.0 * w.w_rot * J.topRows<3>().transpose() * phi_world)
                        .transpose();
  }

  const Eigen::VectorXd ws = smooth_weights(w, n);
  for (int t = 0; t + 1 < T; ++t) {
    const Eigen::RowVectorXd d =
        2.0 * (x.row(t + 1) - x.row(t)).cwiseProduct(ws.transpose());
    g.row(t + 1) += d;
    g.row(t) -= d;
  }

  const double yaw_ref = yaw_reference(req);
  for (int t = 0; t < T; ++t) {
    g(t, RobotModel::kYawIndex) +=
        2.0 * w.w_yaw * (x(t, RobotModel::kYawIndex) - yaw_ref);
  }

  if (w.w_col > 0.0 && !req.obstacles.empty() &&
      !model.collision_spheres().empty()) {
    for (int t = 0; t < T; ++t) {
      const auto frames = model.link_frames(x.row(t).transpose());
      const auto centers = model.sphere_centers(frames);
      for (std::size_t s = 0; s < centers.size(); ++s) {
        const auto& sphere = model.collision_spheres()[s];
        for (const auto& o : req.obstacles) {
          const Vec3 diff = centers[s] - o.center;
          const double norm = diff.norm();
          const double dist = norm - sphere.radius - o.radius;
          const double h = w.d_safe - dist;
          if (h <= 0.0 || norm < 1e-12) continue;
          const Eigen::Matrix3Xd Jp =
              model.point_jacobian(frames, sphere.link, centers[s]);
          g.row(t) += (-2.0 * w.w_col * h / norm) * (diff.transpose() * Jp);
        }
      }
    }
  }
  return g;
}

double min_clearance(const TrajectoryMatrix& x, const PlanRequest& req) {
  const RobotModel& model = *req.model;
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < x.rows(); ++t) {
    const auto centers =
        model.sphere_centers(model.link_frames(x.row(t).transpose()));
    for (std::size_t s = 0; s < centers.size(); ++s) {
      for (const auto& o : req.obstacles) {
        best = std::min(best, (centers[s] - o.center).norm() -
                                  model.collision_spheres()[s].radius -
                                  o.radius);
      }
    }
  }
  return best;
}

WholeBodyTrajectory plan(const PlanRequest& req) {
  if (req.model == nullptr) throw std::invalid_argument("plan: model is null");
  const RobotModel& model = *req.model;
  const int n = model.dofs();
  const int T = req.T;
  if (T < 2) throw std::invalid_argument("plan: T must be >= 2");
  if (req.x_init.size() != n) {
    throw DimensionMismatch("x_init size", n, req.x_init.size());
  }
  if (!model.within_limits(req.x_init)) {
    throw std::invalid_argument("plan: x_init outside joint limits");
  }
  req.weights.validate(n);
  const SolverOptions& opt = req.solver;

  // Linear interpolation toward an IK terminal configuration.
  Configuration x_goal = req.x_init;
  if (opt.ik_init) {
    IkOptions ik;
    ik.group = req.mode;
    ik.max_iters = 300;
    if (auto sol = ik_damped_least_squares(model, req.goal, req.x_init, ik)) {
      x_goal = *sol;
    }
  }
  TrajectoryMatrix x(T, n);
  for (int t = 0; t < T; ++t) {
    const double a = static_cast<double>(t) / (T - 1);
    x.row(t) = ((1.0 - a) * req.x_init + a * x_goal).transpose();
  }
  x.row(0) = req.x_init.transpose();

  TrajectoryMatrix free = TrajectoryMatrix::Ones(T, n);
  free.row(0).setZero();
  const Eigen::VectorXd mask = model.mask(req.mode);
  for (int j = 0; j < n; ++j) {
    if (mask[j] == 0.0) free.col(j).setZero();
  }
  const Eigen::RowVectorXd lo = model.lower().transpose();
  const Eigen::RowVectorXd hi = model.upper().transpose();
  auto project = [&](TrajectoryMatrix& m) {
    for (int t = 1; t < T; ++t) m.row(t) = m.row(t).cwiseMax(lo).cwiseMin(hi);
  };
  project(x);

  WholeBodyTrajectory out;
  double f = total_cost(x, req);
  out.cost_history.push_back(f);
  double step = 1.0;
  int iter = 0;
  for (; iter < opt.max_iters; ++iter) {
    const TrajectoryMatrix g = cost_gradient(x, req).cwiseProduct(free);
    if (g.squaredNorm() == 0.0) break;
    bool accepted = false;
    TrajectoryMatrix candidate;
    double f_new = f;
    auto armijo_ok = [&](const TrajectoryMatrix& c, double fc) {
      const double predicted = (g.cwiseProduct(c - x)).sum();
      return predicted < 0.0 && fc <= f + opt.armijo_c * predicted && fc < f;
    };

    // Projected Newton step on the variables not pinned at a bound.
    {
      const Eigen::MatrixXd H = gauss_newton_hessian(x, req);
      std::vector<int> idx;
      for (int t = 1; t < T; ++t) {
        for (int j = 0; j < n; ++j) {
          if (free(t, j) == 0.0) continue;
          const double gap = 1e-9 * (1.0 + std::abs(x(t, j)));
          if (x(t, j) <= lo[j] + gap && g(t, j) > 0.0) continue;
          if (x(t, j) >= hi[j] - gap && g(t, j) < 0.0) continue;
          idx.push_back(t * n + j);
        }
      }
      if (!idx.empty()) {
        const int m = static_cast<int>(idx.size());
        Eigen::MatrixXd Hf(m, m);
        Eigen::VectorXd gf(m);
        for (int a = 0; a < m; ++a) {
          gf[a] = g(idx[a] / n, idx[a] % n);
          for (int b = 0; b < m; ++b) Hf(a, b) = H(idx[a], idx[b]);
        }
        const double damping = 1e-8 * (1.0 + Hf.diagonal().maxCoeff());
        Hf.diagonal().array() += damping;
        const Eigen::VectorXd df = Hf.ldlt().solve(-gf);
        if (df.allFinite()) {
          TrajectoryMatrix d = TrajectoryMatrix::Zero(T, n);
          for (int a = 0; a < m; ++a) d(idx[a] / n, idx[a] % n) = df[a];
          double alpha = 1.0;
          for (int k = 0; k < 40; ++k, alpha *= opt.shrink) {
            candidate = x + alpha * d;
            project(candidate);
            f_new = total_cost(candidate, req);
            if (armijo_ok(candidate, f_new)) {
              accepted = true;
              break;
            }
          }
        }
      }
    }

    // Fallback: projected gradient step.
    if (!accepted) {
      step *= 2.0;
      for (int k = 0; k < 80; ++k, step *= opt.shrink) {
        candidate = x - step * g;
        project(candidate);
        f_new = total_cost(candidate, req);
        if (armijo_ok(candidate, f_new)) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;
    const double decrease = f - f_new;
    x = candidate;
    f = f_new;
    out.cost_history.push_back(f);
    if (decrease < opt.min_decrease) {
      ++iter;
      break;
    }
  }

  out.iterations = iter;
  out.final_cost = f;
  out.waypoints.reserve(T);
  for (int t = 0; t < T; ++t) out.waypoints.push_back(x.row(t).transpose());
  out.waypoints[0] = req.x_init;
  out.terminal_error =
      pose_error(model.forward_kinematics(out.waypoints.back()), req.goal);
  out.min_clearance = min_clearance(x, req);
  const bool clear = req.obstacles.empty() || model.collision_spheres().empty() ||
                     out.min_clearance >= req.weights.d_safe - opt.clearance_slack;
  out.converged = out.terminal_error.position <= opt.pos_tol &&
                  out.terminal_error.rotation <= opt.rot_tol && clear;
  return out;
}

WholeBodyTrajectory track_eef_waypoints(const RobotModel& model,
                                        const Configuration& x_init,
                                        const std::vector<Pose>& waypoints,
                                        const PlanRequest& settings) {
  WholeBodyTrajectory out;
  out.waypoints.push_back(x_init);
  out.converged = true;
  out.min_clearance = std::numeric_limits<double>::infinity();
  PlanRequest req = settings;
  req.model = &model;
  if (!req.weights.yaw_ref) {
    req.weights.yaw_ref = x_init[RobotModel::kYawIndex];
  }
  Configuration current = x_init;
  for (const Pose& target : waypoints) {
    req.x_init = current;
    req.goal = target;
    const WholeBodyTrajectory seg = plan(req);
    for (std::size_t t = 1; t < seg.waypoints.size(); ++t) {
      out.waypoints.push_back(seg.waypoints[t]);
    }
    out.converged = out.converged && seg.converged;
    out.final_cost += seg.final_cost;
    out.iterations += seg.iterations;
    out.terminal_error = seg.terminal_error;
    out.min_clearance = std::min(out.min_clearance, seg.min_clearance);
    current = seg.waypoints.back();
    if (!seg.converged) break;
  }
  return out;
}

}  // namespace mobgen
