#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "geopg/constants.hpp"
#include "geopg/errors.hpp"
#include "geopg/rng.hpp"
#include "geopg/rollout.hpp"

namespace geopg {

template <class Value>
struct Estimate {
  Value value;
  long horizon;  // the geometric draw used
};

/// EstQ: unbiased Q-function estimate. Draws T' ~ Geom(1 - sqrt(gamma)) from
/// the substream "estq.T" and accumulates sqrt(gamma)-discounted rewards of a
/// rollout started at (s, a) on the substream "estq.traj":
///   q_hat = sum_{t=0}^{T'} gamma^{t/2} R(s_t, a_t).
/// Always |q_hat| <= U_R / (1 - sqrt(gamma)); E[q_hat | s, a] = Q(s, a).
template <class Env, class Policy>
Estimate<double> est_q(const Env& env, const Policy& policy, const Eigen::VectorXd& theta,
                       const typename Env::State& s, const typename Env::Action& a,
                       RngStream& rng) {
  auto rng_t = rng.stream("estq.T");
  auto rng_traj = rng.stream("estq.traj");
  const double sqrt_gamma = std::sqrt(env.gamma());
  const long horizon = sample_geometric(1.0 - sqrt_gamma, rng_t);

  double q_hat = 0.0;
  double discount = 1.0;
  typename Env::State state = s;
  typename Env::Action action = a;
  for (long t = 0; t <= horizon; ++t) {
    if (t > 0) action = policy.sample(theta, env.observe(state), rng_traj);
    if (t < horizon) {
      auto step = env.step(state, action, rng_traj);
      q_hat += discount * step.reward;
      state = step.next;
    } else {
      q_hat += discount * env.reward(state, action);
    }
    discount *= sqrt_gamma;
  }
  return {q_hat, horizon};
}

/// EstV: as EstQ but the first action is drawn from the policy.
template <class Env, class Policy>
Estimate<double> est_v(const Env& env, const Policy& policy, const Eigen::VectorXd& theta,
                       const typename Env::State& s, RngStream& rng) {
  auto rng_a0 = rng.stream("estv.a0");
  const auto a0 = policy.sample(theta, env.observe(s), rng_a0);
  auto inner = rng.stream("estv.inner");
  return est_q(env, policy, theta, s, a0, inner);
}

/// Rollout bookkeeping attached to one stochastic policy gradient.
struct GradientEstimateMeta {
  long outer_horizon = 0;    // T for the occupancy sample
  long q_horizon = -1;       // T' of the Q rollout (QHat, AdvDiff)
  long v_horizon = -1;       // T' of the V rollout at s_T (AdvDiff, AdvTd)
  long v_next_horizon = -1;  // T'' of the V rollout at s'_T (AdvTd)
  double q_hat = std::numeric_limits<double>::quiet_NaN();
  double v_hat = std::numeric_limits<double>::quiet_NaN();
  double v_hat_next = std::numeric_limits<double>::quiet_NaN();
};

template <class State, class Action>
struct GradientEstimate {
  EstimatorKind kind = EstimatorKind::QHat;
  Eigen::VectorXd vector;
  GradientEstimateMeta meta;
  State state;    // s_T
  Action action;  // a_T
  std::optional<State> next_state;  // s'_T (AdvTd only)
};

/// EvalPG: one unbiased stochastic policy gradient of the requested kind.
///
///   QHat:    (1-gamma)^-1 q_hat(s_T, a_T) score(a_T | s_T)
///   AdvDiff: (1-gamma)^-1 (q_hat - v_hat(s_T)) score(a_T | s_T)
///   AdvTd:   (1-gamma)^-1 (R(s_T,a_T) + gamma v_hat(s'_T) - v_hat(s_T)) score(a_T | s_T)
///
/// The occupancy draw, the horizons and every inner rollout consume disjoint
/// named substreams of `rng`, so the independence the unbiasedness proof needs
/// holds by construction. When `constants` is supplied the almost-sure bound
/// ||g|| <= l(kind) is asserted on construction.
template <class Env, class Policy>
GradientEstimate<typename Env::State, typename Env::Action> eval_pg(
    EstimatorKind kind, const Env& env, const Policy& policy, const Eigen::VectorXd& theta,
    RngStream& rng, const ProblemConstants* constants = nullptr) {
  GradientEstimate<typename Env::State, typename Env::Action> g;
  g.kind = kind;

  auto rng_outer = rng.stream("outer");
  const auto occ = rollout_to_occupancy_sample(env, policy, theta, rng_outer);
  g.state = occ.state;
  g.action = occ.action;
  g.meta.outer_horizon = occ.horizon;

  const double inv = 1.0 / (1.0 - env.gamma());
  double weight = 0.0;
  switch (kind) {
    case EstimatorKind::QHat: {
      auto rng_q = rng.stream("q");
      const auto q = est_q(env, policy, theta, occ.state, occ.action, rng_q);
      g.meta.q_horizon = q.horizon;
      g.meta.q_hat = q.value;
      weight = q.value;
      break;
    }
    case EstimatorKind::AdvDiff: {
      auto rng_q = rng.stream("q");
      auto rng_v = rng.stream("v");
      const auto q = est_q(env, policy, theta, occ.state, occ.action, rng_q);
      const auto v = est_v(env, policy, theta, occ.state, rng_v);
      g.meta.q_horizon = q.horizon;
      g.meta.v_horizon = v.horizon;
      g.meta.q_hat = q.value;
      g.meta.v_hat = v.value;
      weight = q.value - v.value;
      break;
    }
    case EstimatorKind::AdvTd: {
      auto rng_next = rng.stream("next_state");
      auto rng_vn = rng.stream("vnext");
      auto rng_v = rng.stream("v");
      const auto step = env.step(occ.state, occ.action, rng_next);
      const auto v_next = est_v(env, policy, theta, step.next, rng_vn);
      const auto v = est_v(env, policy, theta, occ.state, rng_v);
      g.next_state = step.next;
      g.meta.v_next_horizon = v_next.horizon;
      g.meta.v_horizon = v.horizon;
      g.meta.v_hat_next = v_next.value;
      g.meta.v_hat = v.value;
      weight = step.reward + env.gamma() * v_next.value - v.value;
      break;
    }
  }

  g.vector = inv * weight * policy.score(theta, env.observe(occ.state), occ.action);

  if (constants != nullptr) {
    const double bound = constants->l_for(kind);
    if (g.vector.norm() > bound * (1.0 + 1e-12))
      throw NumericError("eval_pg: almost-sure gradient bound violated");
  }
  return g;
}

}  // namespace geopg
