#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "geopg/errors.hpp"
#include "geopg/rng.hpp"

namespace geopg {

/// Tabular softmax policy: one logit per (state, action), theta laid out
/// row-major by state. pi_theta(a|s) = softmax(theta[s, .])[a].
class TabularSoftmaxPolicy {
 public:
  using Obs = int;
  using Action = int;

  TabularSoftmaxPolicy(int n_states, int n_actions) : n_states_(n_states), n_actions_(n_actions) {
    if (n_states <= 0 || n_actions <= 0) throw ParameterError("TabularSoftmaxPolicy: bad dimensions");
  }

  int dim() const { return n_states_ * n_actions_; }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }

  Eigen::VectorXd init_theta() const { return Eigen::VectorXd::Zero(dim()); }

  /// Action distribution at state s.
  Eigen::VectorXd probs(const Eigen::VectorXd& theta, int s) const {
    check(theta, s, 0);
    Eigen::VectorXd logits = theta.segment(s * n_actions_, n_actions_);
    logits.array() -= logits.maxCoeff();
    Eigen::VectorXd p = logits.array().exp();
    p /= p.sum();
    return p;
  }

  /// Full S x A policy matrix (used by the DP oracle).
  Eigen::MatrixXd prob_matrix(const Eigen::VectorXd& theta) const {
    Eigen::MatrixXd P(n_states_, n_actions_);
    for (int s = 0; s < n_states_; ++s) P.row(s) = probs(theta, s).transpose();
    return P;
  }

  int sample(const Eigen::VectorXd& theta, int s, RngStream& rng) const {
    return rng.categorical(probs(theta, s));
  }

  double log_prob(const Eigen::VectorXd& theta, int s, int a) const {
    check(theta, s, a);
    const double p = probs(theta, s)[a];
    if (p <= 0.0) throw ScoreDomainError("TabularSoftmaxPolicy: zero-probability action");
    return std::log(p);
  }

  /// grad_theta log pi(a|s): e_a - pi on the s-block, zero elsewhere.
  Eigen::VectorXd score(const Eigen::VectorXd& theta, int s, int a) const {
    check(theta, s, a);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
    g.segment(s * n_actions_, n_actions_) = -probs(theta, s);
    g[s * n_actions_ + a] += 1.0;
    return g;
  }

  /// Hessian of log pi(a|s): -(diag(pi) - pi pi^T) on the s-block, independent
  /// of which action was taken.
  Eigen::MatrixXd score_hessian(const Eigen::VectorXd& theta, int s, int a) const {
    check(theta, s, a);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim(), dim());
    const Eigen::VectorXd p = probs(theta, s);
    h.block(s * n_actions_, s * n_actions_, n_actions_, n_actions_) =
        p * p.transpose() - Eigen::MatrixXd(p.asDiagonal());
    return h;
  }

  /// Softmax logits are gauge symmetric: shifting a state's block by a
  /// constant never changes the policy, so scores, gradients and the Hessian
  /// are all orthogonal to these directions and the Fisher integral is
  /// singular along them. Returns an orthonormal basis (one column per state)
  /// of that null space; Fisher floors are taken on its complement.
  Eigen::MatrixXd gauge_null_basis() const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim(), n_states_);
    const double w = 1.0 / std::sqrt(static_cast<double>(n_actions_));
    for (int s = 0; s < n_states_; ++s)
      g.block(s * n_actions_, s, n_actions_, 1).setConstant(w);
    return g;
  }

 private:
  void check(const Eigen::VectorXd& theta, int s, int a) const {
    if (theta.size() != dim()) throw ParameterError("TabularSoftmaxPolicy: theta has wrong dimension");
    if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_)
      throw ParameterError("TabularSoftmaxPolicy: index out of range");
  }

  int n_states_;
  int n_actions_;
};

}  // namespace geopg
