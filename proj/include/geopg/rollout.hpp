#pragma once

#include <Eigen/Dense>
#include <vector>

#include "geopg/rng.hpp"

namespace geopg {

/// A finite rollout of horizon T: sequences indexed t = 0..T inclusive.
template <class State, class Action>
struct RolloutTrace {
  std::vector<State> states;
  std::vector<Action> actions;
  std::vector<double> rewards;
  long horizon = 0;
};

/// Simulates t = 0..T from `start` with a_t ~ pi_theta(.|s_t).
template <class Env, class Policy>
RolloutTrace<typename Env::State, typename Env::Action> rollout_fixed_horizon(
    const Env& env, const Policy& policy, const Eigen::VectorXd& theta,
    const typename Env::State& start, long horizon, RngStream& rng) {
  RolloutTrace<typename Env::State, typename Env::Action> trace;
  trace.horizon = horizon;
  trace.states.reserve(horizon + 1);
  trace.actions.reserve(horizon + 1);
  trace.rewards.reserve(horizon + 1);
  typename Env::State s = start;
  for (long t = 0; t <= horizon; ++t) {
    const auto a = policy.sample(theta, env.observe(s), rng);
    trace.states.push_back(s);
    trace.actions.push_back(a);
    if (t < horizon) {
      auto step = env.step(s, a, rng);
      trace.rewards.push_back(step.reward);
      s = step.next;
    } else {
      trace.rewards.push_back(env.reward(s, a));
    }
  }
  return trace;
}

template <class State, class Action>
struct OccupancySample {
  State state;
  Action action;
  long horizon;  // the geometric draw T
};

/// Draws T ~ Geom(1-gamma) and rolls out T steps from the start state; the
/// returned (s_T, a_T) is distributed as the discounted state-action occupancy
/// measure rho_theta. Uses the substreams "occ.T" and "occ.traj" of `rng`.
template <class Env, class Policy>
OccupancySample<typename Env::State, typename Env::Action> rollout_to_occupancy_sample(
    const Env& env, const Policy& policy, const Eigen::VectorXd& theta, RngStream& rng) {
  auto rng_t = rng.stream("occ.T");
  auto rng_traj = rng.stream("occ.traj");
  const long T = sample_geometric(1.0 - env.gamma(), rng_t);
  typename Env::State s = env.initial_state(rng_traj);
  for (long t = 0; t < T; ++t) {
    const auto a = policy.sample(theta, env.observe(s), rng_traj);
    s = env.step(s, a, rng_traj).next;
  }
  const auto a = policy.sample(theta, env.observe(s), rng_traj);
  return {s, a, T};
}

}  // namespace geopg
