#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "geopg/errors.hpp"
#include "geopg/tabular_mdp.hpp"

namespace geopg {
namespace dp {

/// Exact quantities for a policy on a tabular MDP. `occupancy` is the
/// normalized discounted state-action measure ((1-gamma) sum_t gamma^t ...),
/// so it sums to 1.
struct ExactSolution {
  Eigen::VectorXd v;          // per state
  Eigen::MatrixXd q;          // state x action
  Eigen::MatrixXd occupancy;  // state x action
  double j_theta = 0.0;
};

inline Eigen::MatrixXd policy_transition(const TabularMdp& mdp, const Eigen::MatrixXd& pi) {
  const int S = mdp.n_states(), A = mdp.n_actions();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(S, S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) p.row(s) += pi(s, a) * mdp.transition_row(s, a);
  return p;
}

/// Solves (I - gamma P_pi) V = R_pi directly; Q = R + gamma P V; J = V(s0).
template <class Policy>
ExactSolution exact_values(const TabularMdp& mdp, const Policy& policy,
                           const Eigen::VectorXd& theta) {
  const int S = mdp.n_states(), A = mdp.n_actions();
  const Eigen::MatrixXd pi = policy.prob_matrix(theta);
  const Eigen::MatrixXd p_pi = policy_transition(mdp, pi);
  const Eigen::VectorXd r_pi = (pi.array() * mdp.reward_table().array()).rowwise().sum();

  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(S, S) - mdp.gamma() * p_pi;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);
  ExactSolution sol;
  sol.v = lu.solve(r_pi);
  if (!sol.v.allFinite()) throw NumericError("exact_values: linear solve failed");

  sol.q.resize(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      sol.q(s, a) = mdp.reward(s, a) + mdp.gamma() * mdp.transition_row(s, a).dot(sol.v);

  // state marginal: rho^T (I - gamma P_pi) = (1-gamma) e_{s0}^T
  Eigen::VectorXd e = Eigen::VectorXd::Zero(S);
  e[mdp.start_state()] = 1.0 - mdp.gamma();
  Eigen::VectorXd rho_s = sys.transpose().partialPivLu().solve(e);
  if (!rho_s.allFinite()) throw NumericError("exact_values: occupancy solve failed");
  sol.occupancy = rho_s.asDiagonal() * pi;

  sol.j_theta = sol.v[mdp.start_state()];
  return sol;
}

template <class Policy>
Eigen::MatrixXd exact_occupancy(const TabularMdp& mdp, const Policy& policy,
                                const Eigen::VectorXd& theta) {
  return exact_values(mdp, policy, theta).occupancy;
}

template <class Policy>
double exact_return(const TabularMdp& mdp, const Policy& policy, const Eigen::VectorXd& theta) {
  return exact_values(mdp, policy, theta).j_theta;
}

/// Policy Gradient Theorem on the tabular sums:
///   grad J = (1-gamma)^-1 sum_{s,a} rho(s,a) score(a|s) Q(s,a).
template <class Policy>
Eigen::VectorXd exact_policy_gradient(const TabularMdp& mdp, const Policy& policy,
                                      const Eigen::VectorXd& theta) {
  const auto sol = exact_values(mdp, policy, theta);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(policy.dim());
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const double w = sol.occupancy(s, a) * sol.q(s, a);
      if (w != 0.0) g += w * policy.score(theta, s, a);
    }
  return g / (1.0 - mdp.gamma());
}

/// grad_theta Q(s,a) for all (s,a), stacked (S*A) x d, from the linear fixed
/// point grad Q = gamma P (B + Pi grad Q) with
/// B(s') = sum_a' pi(a'|s') score(a'|s') Q(s',a').
template <class Policy>
Eigen::MatrixXd exact_q_gradient(const TabularMdp& mdp, const Policy& policy,
                                 const Eigen::VectorXd& theta) {
  const int S = mdp.n_states(), A = mdp.n_actions(), d = policy.dim();
  const auto sol = exact_values(mdp, policy, theta);
  const Eigen::MatrixXd pi = policy.prob_matrix(theta);

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(S, d);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      b.row(s) += pi(s, a) * sol.q(s, a) * policy.score(theta, s, a).transpose();

  // marginalizer Pi: (S x S*A) with pi weights
  Eigen::MatrixXd marg = Eigen::MatrixXd::Zero(S, S * A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) marg(s, s * A + a) = pi(s, a);

  const Eigen::MatrixXd& p_sa = mdp.transition();  // (S*A) x S
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(S * A, S * A) - mdp.gamma() * p_sa * marg;
  Eigen::MatrixXd grad_q = sys.partialPivLu().solve(mdp.gamma() * p_sa * b);
  if (!grad_q.allFinite()) throw NumericError("exact_q_gradient: linear solve failed");
  return grad_q;
}

/// Exact Hessian of J via the decomposition H = H1 + H2 + H12 + H12^T,
/// integrated against the unnormalized occupancy (occupancy / (1-gamma)):
///   H1  = sum q(s,a) Q score score^T
///   H2  = sum q(s,a) Q grad_score
///   H12 = sum q(s,a) score (grad Q)^T.
template <class Policy>
Eigen::MatrixXd exact_hessian(const TabularMdp& mdp, const Policy& policy,
                              const Eigen::VectorXd& theta) {
  const int S = mdp.n_states(), A = mdp.n_actions(), d = policy.dim();
  const auto sol = exact_values(mdp, policy, theta);
  const Eigen::MatrixXd grad_q = exact_q_gradient(mdp, policy, theta);

  Eigen::MatrixXd h1 = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd h2 = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd h12 = Eigen::MatrixXd::Zero(d, d);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const double w = sol.occupancy(s, a);
      if (w == 0.0) continue;
      const Eigen::VectorXd sc = policy.score(theta, s, a);
      h1 += w * sol.q(s, a) * (sc * sc.transpose());
      h2 += w * sol.q(s, a) * policy.score_hessian(theta, s, a);
      h12 += w * sc * grad_q.row(s * A + a);
    }
  Eigen::MatrixXd h = (h1 + h2 + h12 + h12.transpose()) / (1.0 - mdp.gamma());
  return 0.5 * (h + h.transpose());  // symmetrize roundoff
}

/// Exact Fisher integral sum_{s,a} rho(s,a) score score^T.
template <class Policy>
Eigen::MatrixXd exact_fisher(const TabularMdp& mdp, const Policy& policy,
                             const Eigen::VectorXd& theta) {
  const auto sol = exact_values(mdp, policy, theta);
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(policy.dim(), policy.dim());
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const double w = sol.occupancy(s, a);
      if (w == 0.0) continue;
      const Eigen::VectorXd sc = policy.score(theta, s, a);
      f += w * (sc * sc.transpose());
    }
  return f;
}

struct ValueIterationResult {
  Eigen::MatrixXd q_star;         // state x action
  std::vector<int> greedy;        // lowest-index argmax per state
  int sweeps = 0;
  double residual = 0.0;
};

/// Optimal-Bellman value iteration to sup-norm residual <= tol; greedy policy
/// breaks ties toward the lowest action index.
inline ValueIterationResult value_iteration(const TabularMdp& mdp, double tol) {
  if (!(tol > 0.0)) throw ParameterError("value_iteration: tol must be positive");
  const int S = mdp.n_states(), A = mdp.n_actions();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
  ValueIterationResult res;
  res.q_star.resize(S, A);
  const int max_sweeps = 1000000;
  for (res.sweeps = 1; res.sweeps <= max_sweeps; ++res.sweeps) {
    double delta = 0.0;
    Eigen::VectorXd v_new(S);
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        const double q = mdp.reward(s, a) + mdp.gamma() * mdp.transition_row(s, a).dot(v);
        res.q_star(s, a) = q;
        best = std::max(best, q);
      }
      v_new[s] = best;
      delta = std::max(delta, std::abs(v_new[s] - v[s]));
    }
    v = v_new;
    res.residual = delta;
    if (delta <= tol) break;
  }
  res.greedy.resize(S);
  for (int s = 0; s < S; ++s) {
    int best_a = 0;
    for (int a = 1; a < A; ++a)
      if (res.q_star(s, a) > res.q_star(s, best_a)) best_a = a;
    res.greedy[s] = best_a;
  }
  return res;
}

/// Policy-evaluation value iteration (used to cross-check the linear solve).
template <class Policy>
Eigen::VectorXd evaluate_by_iteration(const TabularMdp& mdp, const Policy& policy,
                                      const Eigen::VectorXd& theta, double tol) {
  const Eigen::MatrixXd pi = policy.prob_matrix(theta);
  const Eigen::MatrixXd p_pi = policy_transition(mdp, pi);
  const Eigen::VectorXd r_pi = (pi.array() * mdp.reward_table().array()).rowwise().sum();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mdp.n_states());
  for (int it = 0; it < 1000000; ++it) {
    Eigen::VectorXd v_new = r_pi + mdp.gamma() * (p_pi * v);
    const double delta = (v_new - v).cwiseAbs().maxCoeff();
    v = v_new;
    if (delta <= tol) break;
  }
  return v;
}

// ---- numerical-derivative oracles ----

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& theta, double h = 1e-5) {
  if (!(h > 0.0)) throw ParameterError("fd_gradient: h must be positive");
  Eigen::VectorXd g(theta.size());
  Eigen::VectorXd t = theta;
  for (int i = 0; i < theta.size(); ++i) {
    t[i] = theta[i] + h;
    const double fp = f(t);
    t[i] = theta[i] - h;
    const double fm = f(t);
    t[i] = theta[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) throw NumericError("fd_gradient: non-finite evaluation");
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& theta, double h = 1e-3) {
  if (!(h > 0.0)) throw ParameterError("fd_hessian: h must be positive");
  const int d = static_cast<int>(theta.size());
  Eigen::MatrixXd hess(d, d);
  Eigen::VectorXd t = theta;
  const auto eval = [&](int i, double di, int j, double dj) {
    t[i] += di;
    t[j] += dj;
    const double v = f(t);
    t[i] = theta[i];
    t[j] = theta[j];
    if (!std::isfinite(v)) throw NumericError("fd_hessian: non-finite evaluation");
    return v;
  };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = (eval(i, h, j, h) - eval(i, h, j, -h) - eval(i, -h, j, h) +
                        eval(i, -h, j, -h)) / (4.0 * h * h);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace dp
}  // namespace geopg
