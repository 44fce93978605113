#include "lf/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "lf/errors.hpp"

namespace lf {

PathInterpolator::PathInterpolator(std::vector<Vec3> waypoints, double dt_step)
    : dt_(dt_step), n_points_(waypoints.size()) {
  if (waypoints.empty() || !(dt_step > 0.0)) {
    throw DomainError("interpolator needs at least one waypoint and dt > 0");
  }
  last_ = waypoints.back();
  const std::size_t T = waypoints.size() - 1;  // number of segments
  segments_.resize(T);
  const double h = dt_;
  for (std::size_t k = 0; k < T; ++k) {
    Segment& s = segments_[k];
    if (T == 1) {
      // two waypoints: the quadratic degenerates to the connecting line
      s.c0 = waypoints[0];
      s.c1 = (waypoints[1] - waypoints[0]) * (1.0 / h);
      s.c2 = Vec3{};
    } else if (k == 0) {
      // one-sided stencil {p0, p1, p2} with local time u in [0, h]
      const Vec3 &a = waypoints[0], &b = waypoints[1], &c = waypoints[2];
      s.c0 = a;
      s.c1 = (a * -3.0 + b * 4.0 - c) * (1.0 / (2.0 * h));
      s.c2 = (a - b * 2.0 + c) * (1.0 / (2.0 * h * h));
    } else {
      // centered stencil {p^{k-1}, p^k, p^{k+1}} with local time u in [0, h]
      const Vec3 &a = waypoints[k - 1], &b = waypoints[k], &c = waypoints[k + 1];
      s.c0 = b;
      s.c1 = (c - a) * (1.0 / (2.0 * h));
      s.c2 = (a - b * 2.0 + c) * (1.0 / (2.0 * h * h));
    }
  }
}

TrajectorySample PathInterpolator::sample(double t) const {
  TrajectorySample out;
  out.t = t;
  if (segments_.empty() || t >= duration()) {
    out.p_ref = last_;
    return out;  // hold the final waypoint with zero derivatives
  }
  const double tt = std::max(t, 0.0);
  std::size_t k = static_cast<std::size_t>(tt / dt_);
  if (k >= segments_.size()) k = segments_.size() - 1;
  const double u = tt - static_cast<double>(k) * dt_;
  const Segment& s = segments_[k];
  out.p_ref = s.c0 + s.c1 * u + s.c2 * (u * u);
  out.v_ref = s.c1 + s.c2 * (2.0 * u);
  out.a_ref = s.c2 * 2.0;
  return out;
}

ControlGains derive_gains(const TrackerParams& prm) {
  if (!(prm.ctrl_hz > 0.0) || !(prm.q_pos > 0.0) || !(prm.q_vel > 0.0) ||
      !(prm.r_acc > 0.0) || !std::isfinite(prm.q_pos + prm.q_vel + prm.r_acc)) {
    throw NonConvergentError("gain derivation needs positive finite weights");
  }
  const double dt = 1.0 / prm.ctrl_hz;
  // Exact ZOH discretization of the double integrator, one axis:
  //   A = [1 dt; 0 1],  B = [dt^2/2; dt]
  const double a12 = dt, b1 = 0.5 * dt * dt, b2 = dt;

  // Fixed-point Riccati recursion on the symmetric P = [p11 p12; p12 p22],
  // P <- Q + A'PA - A'PB (R + B'PB)^{-1} B'PA, seeded at P = Q.
  double p11 = prm.q_pos, p12 = 0.0, p22 = prm.q_vel;
  const int cap = 2000000;
  for (int it = 0; it < cap; ++it) {
    // M = PA, with A's only off-diagonal term a12
    const double m11 = p11, m12 = p11 * a12 + p12;
    const double m21 = p12, m22 = p12 * a12 + p22;
    // s = R + B'PB, w = B'PA (1x2)
    const double pb1 = p11 * b1 + p12 * b2, pb2 = p12 * b1 + p22 * b2;
    const double s = prm.r_acc + b1 * pb1 + b2 * pb2;
    const double w1 = b1 * m11 + b2 * m21, w2 = b1 * m12 + b2 * m22;
    // A'PA
    const double t11 = m11, t12 = m12;
    const double t21 = a12 * m11 + m21, t22 = a12 * m12 + m22;
    const double n11 = prm.q_pos + t11 - w1 * w1 / s;
    const double n12 = 0.5 * ((t12 - w1 * w2 / s) + (t21 - w2 * w1 / s));
    const double n22 = prm.q_vel + t22 - w2 * w2 / s;
    const double res = std::max({std::abs(n11 - p11), std::abs(n12 - p12),
                                 std::abs(n22 - p22)});
    p11 = n11;
    p12 = n12;
    p22 = n22;
    if (!std::isfinite(res)) {
      throw NonConvergentError("Riccati iteration diverged");
    }
    if (res <= 1e-10) {
      const double pb1f = p11 * b1 + p12 * b2, pb2f = p12 * b1 + p22 * b2;
      const double sf = prm.r_acc + b1 * pb1f + b2 * pb2f;
      ControlGains g;
      g.k_p = (b1 * p11 + b2 * p12) / sf;  // first column of B'PA / s
      g.k_v = (b1 * (p11 * a12 + p12) + b2 * (p12 * a12 + p22)) / sf;
      g.k_ff = prm.k_ff;
      g.a_max = prm.a_max;
      g.dt = dt;
      return g;
    }
  }
  throw NonConvergentError("Riccati iteration did not reach residual 1e-10");
}

double closed_loop_radius(const ControlGains& g) {
  const double dt = g.dt, b1 = 0.5 * dt * dt, b2 = dt;
  // A - B K, 2x2
  const double c11 = 1.0 - b1 * g.k_p, c12 = dt - b1 * g.k_v;
  const double c21 = -b2 * g.k_p, c22 = 1.0 - b2 * g.k_v;
  const double tr = c11 + c22, det = c11 * c22 - c12 * c21;
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    return std::max(std::abs((tr + r) / 2.0), std::abs((tr - r) / 2.0));
  }
  return std::sqrt(det);  // complex pair: |lambda| = sqrt(det)
}

Vec3 control_step(const RobotState& s, const TrajectorySample& ref,
                  const ControlGains& g) {
  Vec3 u = (s.p - ref.p_ref) * -g.k_p + (s.v - ref.v_ref) * -g.k_v +
           ref.a_ref * g.k_ff;
  u.x = std::clamp(u.x, -g.a_max, g.a_max);
  u.y = std::clamp(u.y, -g.a_max, g.a_max);
  u.z = std::clamp(u.z, -g.a_max, g.a_max);
  return u;
}

RobotState step_plant(const RobotState& s, const Vec3& u, double dt) {
  RobotState out = s;
  out.p = s.p + s.v * dt + u * (0.5 * dt * dt);
  out.v = s.v + u * dt;
  out.a = u;
  return out;
}

Vec3 sample_disturbance(double sigma, Rng& rng) {
  if (sigma <= 0.0) return Vec3{};
  const double cap = 3.0 * sigma;
  Vec3 d{rng.gauss(sigma), rng.gauss(sigma), rng.gauss(sigma)};
  d.x = std::clamp(d.x, -cap, cap);
  d.y = std::clamp(d.y, -cap, cap);
  d.z = std::clamp(d.z, -cap, cap);
  return d;
}

}  // namespace lf
