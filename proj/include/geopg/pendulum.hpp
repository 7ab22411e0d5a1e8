#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "geopg/errors.hpp"
#include "geopg/rng.hpp"
#include "geopg/tabular_mdp.hpp"  // Step

namespace geopg {

inline double wrap_angle(double theta) {
  double t = std::fmod(theta + M_PI, 2.0 * M_PI);
  if (t < 0.0) t += 2.0 * M_PI;
  return t - M_PI;
}

/// Frictionless pendulum swing-up, non-terminating.
///
/// State (theta, theta_dot); semi-implicit Euler with
///   theta_dot' = theta_dot + (3 g / (2 l) sin(theta) + 3 / (m l^2) u) dt,
/// theta_dot clipped to [-8, 8] and torque to [-torque_limit, torque_limit].
/// Reward -(theta^2 + 0.1 theta_dot^2 + 0.001 u^2) + reward_offset with theta
/// wrapped to [-pi, pi]; at the default offset -0.5 it lies in
/// [-17.1736044, -0.5]. Initial state theta ~ U[-pi, pi], theta_dot ~ U[-1, 1].
class PendulumEnv {
 public:
  using State = Eigen::Vector2d;   // (theta, theta_dot)
  using Action = double;           // torque
  using Obs = Eigen::Vector3d;     // (cos theta, sin theta, theta_dot)

  explicit PendulumEnv(double gamma = 0.97, double reward_offset = -0.5, double torque_limit = 20.0,
                       double gravity = 10.0, double mass = 1.0, double length = 1.0,
                       double dt = 0.05)
      : gamma_(gamma),
        reward_offset_(reward_offset),
        torque_limit_(torque_limit),
        gravity_(gravity),
        mass_(mass),
        length_(length),
        dt_(dt) {
    if (!(gamma_ > 0.0 && gamma_ < 1.0)) throw ParameterError("PendulumEnv: gamma must lie in (0,1)");
    if (!(torque_limit_ > 0.0) || !(dt_ > 0.0)) throw ParameterError("PendulumEnv: bad physics parameters");
  }

  double gamma() const { return gamma_; }
  double reward_offset() const { return reward_offset_; }
  double torque_limit() const { return torque_limit_; }

  State initial_state(RngStream& rng) const {
    State s;
    s << rng.uniform(-M_PI, M_PI), rng.uniform(-1.0, 1.0);
    return s;
  }

  Obs observe(const State& s) const {
    Obs o;
    o << std::cos(s[0]), std::sin(s[0]), s[1];
    return o;
  }

  double reward(const State& s, double torque) const {
    const double u = std::clamp(torque, -torque_limit_, torque_limit_);
    const double th = wrap_angle(s[0]);
    return -(th * th + 0.1 * s[1] * s[1] + 0.001 * u * u) + reward_offset_;
  }

  Step<State> step(const State& s, double torque, RngStream& /*rng*/) const {
    if (!s.allFinite()) throw NumericError("PendulumEnv: non-finite state");
    const double u = std::clamp(torque, -torque_limit_, torque_limit_);
    const double r = reward(s, u);
    double thdot = s[1] + (1.5 * gravity_ / length_ * std::sin(s[0]) +
                           3.0 / (mass_ * length_ * length_) * u) * dt_;
    thdot = std::clamp(thdot, -8.0, 8.0);
    State next;
    next << s[0] + thdot * dt_, thdot;
    if (!next.allFinite()) throw NumericError("PendulumEnv: non-finite state after step");
    return {next, r};
  }

 private:
  double gamma_;
  double reward_offset_;
  double torque_limit_;
  double gravity_;
  double mass_;
  double length_;
  double dt_;
};

inline PendulumEnv reshape_reward(const PendulumEnv& env, double offset) {
  return PendulumEnv(env.gamma(), env.reward_offset() + offset, env.torque_limit());
}

}  // namespace geopg
