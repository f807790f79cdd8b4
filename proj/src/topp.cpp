// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "mobgen/topp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mobgen/errors.hpp"

namespace mobgen {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-12;

// u bound as an affine function of x: u = c0 + c1 * x.
struct Line {
  double c0;
  double c1;
  double at(double x) const { return c0 + c1 * x; }
};

struct GridConstraints {
  std::vector<Line> lower;
  std::vector<Line> upper;
  double x_max = kInf;  // velocity bound and u-free acceleration bounds
};

GridConstraints constraints_at(const GeometricPath& path, int i,
                               const Eigen::VectorXd& v_max,
                               const Eigen::VectorXd& a_max) {
  GridConstraints c;
  for (int j = 0; j < path.dofs(); ++j) {
    const double a = path.dq(i, j);
    const double b = path.ddq(i, j);
    const double A = a_max[j];
    if (std::abs(a) > kTiny) {
      c.x_max = std::min(c.x_max, (v_max[j] / a) * (v_max[j] / a));
      Line lo{-A / a, -b / a};
      Line hi{A / a, -b / a};
      if (a < 0.0) std::swap(lo, hi);
      c.lower.push_back(lo);
      c.upper.push_back(hi);
    } else if (std::abs(b) > kTiny) {
      c.x_max = std::min(c.x_max, A / std::abs(b));
    }
  }
  return c;
}

// Interval of x in [0, x_max] for which max(lower) <= min(upper).
bool feasible_x(const std::vector<Line>& lower, const std::vector<Line>& upper,
                double x_max, double* lo, double* hi) {
  *lo = 0.0;
  *hi = x_max;
  for (const Line& l : lower) {
    for (const Line& u : upper) {
      const double alpha = l.c0 - u.c0;
      const double beta = l.c1 - u.c1;
      if (std::abs(beta) < kTiny) {
        if (alpha > 1e-12) return false;
      } else if (beta > 0.0) {
        *hi = std::min(*hi, -alpha / beta);
      } else {
        *lo = std::max(*lo, -alpha / beta);
      }
    }
  }
  return *lo <= *hi + 1e-12;
}

}  // namespace

InfeasiblePath::InfeasiblePath(int index)
    : std::runtime_error("topp: empty controllable set at grid index " +
                         std::to_string(index)),
      index_(index) {}

void GeometricPath::validate() const {
  const int n = size();
  if (n < 2) throw std::invalid_argument("topp: path needs >= 2 grid points");
  if (q.rows() != n || dq.rows() != n || ddq.rows() != n) {
    throw DimensionMismatch("path rows", n, q.rows());
  }
  if (grid[0] != 0.0 || grid[n - 1] != 1.0) {
    throw std::invalid_argument("topp: grid must span [0, 1]");
  }
  for (int i = 1; i < n; ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("topp: grid must be strictly increasing");
    }
  }
}

GeometricPath GeometricPath::FromWaypoints(const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(w.rows());
  if (n < 2) throw std::invalid_argument("topp: path needs >= 2 waypoints");
  GeometricPath p;
  p.grid = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  p.grid[n - 1] = 1.0;
  p.q = w;
  p.dq.resize(n, w.cols());
  p.ddq.setZero(n, w.cols());
  const double h = 1.0 / (n - 1);
  if (n == 2) {
    p.dq.row(0) = p.dq.row(1) = (w.row(1) - w.row(0)) / h;
    return p;
  }
  for (int i = 1; i + 1 < n; ++i) {
    p.dq.row(i) = (w.row(i + 1) - w.row(i - 1)) / (2.0 * h);
    p.ddq.row(i) = (w.row(i + 1) - 2.0 * w.row(i) + w.row(i - 1)) / (h * h);
  }
  p.dq.row(0) = (-3.0 * w.row(0) + 4.0 * w.row(1) - w.row(2)) / (2.0 * h);
  p.dq.row(n - 1) =
      (3.0 * w.row(n - 1) - 4.0 * w.row(n - 2) + w.row(n - 3)) / (2.0 * h);
  p.ddq.row(0) = p.ddq.row(1);
  p.ddq.row(n - 1) = p.ddq.row(n - 2);
  return p;
}

GeometricPath GeometricPath::FromWaypoints(
    const std::vector<Configuration>& wps) {
  if (wps.empty()) throw std::invalid_argument("topp: no waypoints");
  Eigen::MatrixXd m(wps.size(), wps.front().size());
  for (std::size_t i = 0; i < wps.size(); ++i) m.row(i) = wps[i].transpose();
  return FromWaypoints(m);
}

GeometricPath GeometricPath::Resampled(const std::vector<Configuration>& wps,
                                       int n) {
  const int m = static_cast<int>(wps.size());
  if (m < 2 || n < 2) throw std::invalid_argument("topp: resample sizes");
  const int dofs = static_cast<int>(wps.front().size());
  // Catmull-Rom tangents on a uniform knot spacing of 1.
  std::vector<Eigen::VectorXd> tangent(m);
  for (int i = 0; i < m; ++i) {
    if (i == 0) tangent[i] = wps[1] - wps[0];
    else if (i == m - 1) tangent[i] = wps[m - 1] - wps[m - 2];
    else tangent[i] = 0.5 * (wps[i + 1] - wps[i - 1]);
  }
  Eigen::MatrixXd out(n, dofs);
  for (int k = 0; k < n; ++k) {
    const double u = static_cast<double>(k) * (m - 1) / (n - 1);
    const int seg = std::min(static_cast<int>(u), m - 2);
    const double t = u - seg;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    out.row(k) = (h00 * wps[seg] + h10 * tangent[seg] + h01 * wps[seg + 1] +
                  h11 * tangent[seg + 1])
                     .transpose();
  }
  return FromWaypoints(out);
}

ControllableSets controllable_sets(const GeometricPath& path,
                                   const Eigen::VectorXd& v_max,
                                   const Eigen::VectorXd& a_max) {
  path.validate();
  const int n = path.size();
  if (v_max.size() != path.dofs() || a_max.size() != path.dofs()) {
    throw DimensionMismatch("limit vector size", path.dofs(), v_max.size());
  }
  if ((v_max.array() <= 0.0).any() || (a_max.array() <= 0.0).any()) {
    throw std::invalid_argument("topp: limits must be positive");
  }
  if (path.dq.cwiseAbs().maxCoeff() < kTiny) throw DegeneratePath();

  ControllableSets k;
  k.lo = Eigen::VectorXd::Zero(n);
  k.hi = Eigen::VectorXd::Zero(n);
  // Rest at the end of the path.
  for (int i = n - 2; i >= 0; --i) {
    GridConstraints c = constraints_at(path, i, v_max, a_max);
    const double two_delta = 2.0 * (path.grid[i + 1] - path.grid[i]);
    // x_{i+1} = x + 2 delta u must land in K_{i+1}.
    c.lower.push_back({k.lo[i + 1] / two_delta, -1.0 / two_delta});
    c.upper.push_back({k.hi[i + 1] / two_delta, -1.0 / two_delta});
    double lo, hi;
    if (!feasible_x(c.lower, c.upper, c.x_max, &lo, &hi)) {
      throw InfeasiblePath(i);
    }
    k.lo[i] = lo;
    k.hi[i] = std::max(lo, hi);
  }
  return k;
}

TimedTrajectory retime(const GeometricPath& path, const Eigen::VectorXd& v_max,
                       const Eigen::VectorXd& a_max, Boundary) {
  const ControllableSets k = controllable_sets(path, v_max, a_max);
  const int n = path.size();
  if (k.lo[0] > 1e-12) throw InfeasiblePath(0);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i + 1 < n; ++i) {
    const GridConstraints c = constraints_at(path, i, v_max, a_max);
    const double two_delta = 2.0 * (path.grid[i + 1] - path.grid[i]);
    double u = (k.hi[i + 1] - x[i]) / two_delta;
    for (const Line& l : c.upper) u = std::min(u, l.at(x[i]));
    double next = x[i] + two_delta * u;
    next = std::clamp(next, k.lo[i + 1], k.hi[i + 1]);
    x[i + 1] = std::max(0.0, next);
  }
  x[n - 1] = 0.0;

  TimedTrajectory out;
  out.sd = x.cwiseSqrt();
  out.q = path.q;
  out.qd = path.dq;
  for (int i = 0; i < n; ++i) out.qd.row(i) *= out.sd[i];
  out.times.assign(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) {
    const double sum = out.sd[i] + out.sd[i + 1];
    if (sum < kTiny) throw InfeasiblePath(i);
    out.times[i + 1] =
        out.times[i] + 2.0 * (path.grid[i + 1] - path.grid[i]) / sum;
  }
  return out;
}

std::vector<TimedSample> sample_timed(const TimedTrajectory& traj, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_timed: dt must be > 0");
  std::vector<TimedSample> out;
  const int n = static_cast<int>(traj.times.size());
  if (n == 0) return out;
  const double end = traj.duration();
  const double eps = 1e-9 * std::max(1.0, end);
  auto at = [&](double t) {
    TimedSample s;
    s.t = t;
    const auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
    int hi = static_cast<int>(it - traj.times.begin());
    hi = std::clamp(hi, 1, n - 1);
    const int lo = hi - 1;
    const double span = traj.times[hi] - traj.times[lo];
    const double a =
        span > 0.0 ? std::clamp((t - traj.times[lo]) / span, 0.0, 1.0) : 1.0;
    s.q = ((1.0 - a) * traj.q.row(lo) + a * traj.q.row(hi)).transpose();
    s.qd = ((1.0 - a) * traj.qd.row(lo) + a * traj.qd.row(hi)).transpose();
    return s;
  };
  if (n == 1) {
    out.push_back(at(0.0));
    return out;
  }
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t >= end - eps) break;
    out.push_back(at(t));
  }
  TimedSample last;
  last.t = end;
  last.q = traj.q.row(n - 1).transpose();
  last.qd = traj.qd.row(n - 1).transpose();
  out.push_back(last);
  return out;
}

}  // namespace mobgen
