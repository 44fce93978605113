#pragma once

#include <vector>

#include "lf/geom.hpp"
#include "lf/rng.hpp"

namespace lf {

// Per-robot kinematic state of the holonomic plant (per-axis double
// integrator). Yaw is carried for completeness and held at zero here.
struct RobotState {
  Vec3 p{};
  Vec3 v{};
  Vec3 a{};
  double yaw = 0.0;
};

// One point of the continuous reference trajectory.
struct TrajectorySample {
  double t = 0.0;
  Vec3 p_ref{};
  Vec3 v_ref{};
  Vec3 a_ref{};
};

// Controller configuration (mirrors the scenario schema).
struct TrackerParams {
  double ctrl_hz = 100.0;
  double q_pos = 8.0;  // state cost on position error, per axis
  double q_vel = 4.0;  // state cost on velocity error, per axis
  double r_acc = 1.0;  // input cost on acceleration, per axis
  double k_ff = 1.0;   // feedforward gain on reference acceleration
  double a_max = 6.0;  // per-component command saturation, m/s^2
};

// Feedback row [k_p, k_v] shared by the three identical axes, plus the
// feedforward gain and saturation it was derived with.
struct ControlGains {
  double k_p = 0.0;
  double k_v = 0.0;
  double k_ff = 1.0;
  double a_max = 6.0;
  double dt = 0.01;  // controller period the gains are valid for
};

// Lifts a discrete waypoint path (one waypoint every dt_step seconds) to a
// twice-differentiable-by-parts reference: on segment k the position is the
// quadratic through the three waypoints around k (one-sided at the first
// segment), velocity/acceleration are its analytic derivatives, and past the
// final waypoint the sample holds (p_last, 0, 0). Position is continuous at
// every segment boundary; velocity is piecewise continuous. Coefficients are
// precomputed once, so sampling is O(1).
class PathInterpolator {
 public:
  PathInterpolator(std::vector<Vec3> waypoints, double dt_step);

  TrajectorySample sample(double t) const;  // t >= 0; holds past the end
  double duration() const { return dt_ * static_cast<double>(segments_.size()); }
  const Vec3& final_position() const { return last_; }
  std::size_t num_waypoints() const { return n_points_; }

 private:
  struct Segment {
    Vec3 c0, c1, c2;  // p(u) = c0 + c1 u + c2 u^2, u = t - k dt_step
  };
  std::vector<Segment> segments_;
  Vec3 last_{};
  double dt_ = 1.0;
  std::size_t n_points_ = 0;
};

// Infinite-horizon discrete LQ gains for the exactly discretized per-axis
// double integrator, from a fixed-point solve of the Riccati equation to
// residual 1e-10. Throws NonConvergentError for ill-posed (non-positive or
// non-finite) weights or when the iteration cap is hit.
ControlGains derive_gains(const TrackerParams& prm);

// Largest closed-loop eigenvalue magnitude of the discretized plant under
// gains (must be < 1 for a stabilizing design; exposed for tests/telemetry).
double closed_loop_radius(const ControlGains& g);

// u = -K_fb [p - p_ref; v - v_ref] + k_ff a_ref, saturated per component.
Vec3 control_step(const RobotState& s, const TrajectorySample& ref,
                  const ControlGains& g);

// Exact double-integrator update over dt: p += v dt + u dt^2/2, v += u dt.
RobotState step_plant(const RobotState& s, const Vec3& u, double dt);

// Zero-mean Gaussian acceleration disturbance, each component truncated to
// +-3 sigma. Returns the perturbation to add to a command before integration.
Vec3 sample_disturbance(double sigma, Rng& rng);

}  // namespace lf
