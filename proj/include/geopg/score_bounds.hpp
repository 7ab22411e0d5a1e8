#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "geopg/analysis.hpp"
#include "geopg/rng.hpp"
#include "geopg/rollout.hpp"

namespace geopg {

/// Empirical surrogates for the policy-regularity constants. These are probed
/// lower bounds for the sup quantities (B, L, rho) and a probed upper bound
/// for the Fisher floor L_I; `empirical` stays true to flag that status.
struct ScoreBounds {
  double b_theta = 0.0;
  double l_theta = 0.0;
  double rho_theta = 0.0;
  double l_i = 0.0;
  bool fisher_positive = false;  // Assumption-3 feasibility flag
  bool empirical = true;
};

/// Probes (s,a) ~ rho_theta for ||score|| and ||score_hessian||, a Lipschitz
/// quotient for rho, and the minimum eigenvalue of the Monte-Carlo Fisher
/// integral at theta.
template <class Env, class Policy>
ScoreBounds estimate_score_bounds(const Env& env, const Policy& policy,
                                  const Eigen::VectorXd& theta, long n_probe, RngStream& rng) {
  if (n_probe < 1) throw ParameterError("estimate_score_bounds: need n_probe >= 1");
  ScoreBounds b;
  auto rng_occ = rng.stream("probe.occ");
  auto rng_pert = rng.stream("probe.perturb");
  for (long i = 0; i < n_probe; ++i) {
    auto rng_i = rng_occ.stream("sample", static_cast<std::uint64_t>(i));
    const auto occ = rollout_to_occupancy_sample(env, policy, theta, rng_i);
    const auto obs = env.observe(occ.state);
    b.b_theta = std::max(b.b_theta, policy.score(theta, obs, occ.action).norm());
    const Eigen::MatrixXd h = policy.score_hessian(theta, obs, occ.action);
    b.l_theta = std::max(b.l_theta, h.operatorNorm());

    Eigen::VectorXd theta2 = theta;
    for (int c = 0; c < theta2.size(); ++c) theta2[c] += 0.05 * rng_pert.normal();
    const Eigen::MatrixXd h2 = policy.score_hessian(theta2, obs, occ.action);
    const double dist = (theta2 - theta).norm();
    if (dist > 1e-12) b.rho_theta = std::max(b.rho_theta, (h2 - h).operatorNorm() / dist);
  }
  auto rng_fisher = rng.stream("probe.fisher");
  const long n_fisher = std::max<long>(n_probe, policy.dim());
  const Eigen::MatrixXd fisher = analysis::estimate_fisher(env, policy, theta, n_fisher, rng_fisher);
  b.l_i = std::max(0.0, analysis::restricted_min_eigenvalue(fisher, analysis::policy_gauge_basis(policy)));
  b.fisher_positive = b.l_i > 1e-8;
  return b;
}

}  // namespace geopg
