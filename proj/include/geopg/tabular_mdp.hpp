#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "geopg/errors.hpp"
#include "geopg/rng.hpp"

namespace geopg {

template <class State>
struct Step {
  State next;
  double reward;
};

/// Finite MDP with dense transition tensor P[s][a][s'], reward table R[s][a],
/// discount gamma in (0,1) and a fixed start state.
///
/// Transitions are stored as an (n_states*n_actions) x n_states row-stochastic
/// matrix with row index s*n_actions + a. Immutable after construction.
class TabularMdp {
 public:
  using State = int;
  using Action = int;
  using Obs = int;

  TabularMdp(int n_states, int n_actions, Eigen::MatrixXd transition, Eigen::MatrixXd reward,
             double gamma, int start_state)
      : n_states_(n_states),
        n_actions_(n_actions),
        transition_(std::move(transition)),
        reward_(std::move(reward)),
        gamma_(gamma),
        start_state_(start_state) {
    validate();
  }

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  double gamma() const { return gamma_; }
  int start_state() const { return start_state_; }

  const Eigen::MatrixXd& transition() const { return transition_; }
  const Eigen::MatrixXd& reward_table() const { return reward_; }

  /// Row P(.|s,a) of the transition matrix.
  Eigen::MatrixXd::ConstRowXpr transition_row(int s, int a) const {
    return transition_.row(row_index(s, a));
  }

  double reward(int s, int a) const {
    check_indices(s, a);
    return reward_(s, a);
  }

  double max_abs_reward() const { return reward_.cwiseAbs().maxCoeff(); }
  double min_abs_reward() const { return reward_.cwiseAbs().minCoeff(); }

  /// True when all rewards share one strict sign (the CNC hypothesis).
  bool strict_sign_rewards() const {
    return reward_.minCoeff() > 0.0 || reward_.maxCoeff() < 0.0;
  }

  int initial_state(RngStream& /*rng*/) const { return start_state_; }
  int observe(int s) const { return s; }

  Step<int> step(int s, int a, RngStream& rng) const {
    check_indices(s, a);
    const int next = rng.categorical(transition_.row(row_index(s, a)));
    return {next, reward_(s, a)};
  }

  int row_index(int s, int a) const { return s * n_actions_ + a; }

 private:
  void check_indices(int s, int a) const {
    if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_)
      throw ParameterError("TabularMdp: state/action index out of range");
  }

  void validate() const {
    if (n_states_ <= 0 || n_actions_ <= 0) throw ParameterError("TabularMdp: empty state/action space");
    if (!(gamma_ > 0.0 && gamma_ < 1.0)) throw ParameterError("TabularMdp: gamma must lie strictly in (0,1)");
    if (start_state_ < 0 || start_state_ >= n_states_)
      throw ParameterError("TabularMdp: start state out of range");
    if (transition_.rows() != n_states_ * n_actions_ || transition_.cols() != n_states_)
      throw ParameterError("TabularMdp: transition matrix has wrong shape");
    if (reward_.rows() != n_states_ || reward_.cols() != n_actions_)
      throw ParameterError("TabularMdp: reward table has wrong shape");
    for (int r = 0; r < transition_.rows(); ++r) {
      if (transition_.row(r).minCoeff() < 0.0)
        throw ParameterError("TabularMdp: negative transition probability");
      if (std::abs(transition_.row(r).sum() - 1.0) > 1e-12)
        throw ParameterError("TabularMdp: transition row does not sum to 1");
    }
    if (!reward_.allFinite()) throw ParameterError("TabularMdp: non-finite reward");
  }

  int n_states_;
  int n_actions_;
  Eigen::MatrixXd transition_;  // (S*A) x S, row-stochastic
  Eigen::MatrixXd reward_;      // S x A
  double gamma_;
  int start_state_;
};

/// R'(s,a) = R(s,a) + offset; transitions, gamma and start state unchanged.
inline TabularMdp reshape_reward(const TabularMdp& mdp, double offset) {
  return TabularMdp(mdp.n_states(), mdp.n_actions(), mdp.transition(),
                    mdp.reward_table().array() + offset, mdp.gamma(), mdp.start_state());
}

/// Parses the tabular MDP config document:
///   { "n_states": S, "n_actions": A,
///     "transition": [S*A*S reals, row-major over (s, a, s')],
///     "reward": [S*A reals, row-major over (s, a)],
///     "gamma": g, "start_state": s0 }
/// Rows whose sums deviate from 1 by more than 1e-9 are rejected; accepted
/// rows are renormalized so the in-memory invariant holds at 1e-12.
inline TabularMdp parse_tabular_mdp(const nlohmann::json& j) {
  const int S = j.at("n_states").get<int>();
  const int A = j.at("n_actions").get<int>();
  if (S <= 0 || A <= 0) throw ParameterError("tabular mdp config: non-positive dimensions");
  const auto& pt = j.at("transition");
  const auto& rt = j.at("reward");
  if (static_cast<int>(pt.size()) != S * A * S)
    throw ParameterError("tabular mdp config: transition array has wrong length");
  if (static_cast<int>(rt.size()) != S * A)
    throw ParameterError("tabular mdp config: reward array has wrong length");

  Eigen::MatrixXd P(S * A, S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      for (int sp = 0; sp < S; ++sp) P(s * A + a, sp) = pt.at((s * A + a) * S + sp).get<double>();
  Eigen::MatrixXd R(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) R(s, a) = rt.at(s * A + a).get<double>();

  for (int r = 0; r < P.rows(); ++r) {
    const double sum = P.row(r).sum();
    if (std::abs(sum - 1.0) > 1e-9)
      throw ParameterError("tabular mdp config: transition row sum deviates from 1 by more than 1e-9");
    if (P.row(r).minCoeff() < 0.0)
      throw ParameterError("tabular mdp config: negative transition probability");
    P.row(r) /= sum;
  }

  return TabularMdp(S, A, std::move(P), std::move(R), j.at("gamma").get<double>(),
                    j.at("start_state").get<int>());
}

inline nlohmann::json to_json(const TabularMdp& mdp) {
  nlohmann::json j;
  j["n_states"] = mdp.n_states();
  j["n_actions"] = mdp.n_actions();
  std::vector<double> pt;
  pt.reserve(static_cast<std::size_t>(mdp.transition().size()));
  for (int r = 0; r < mdp.transition().rows(); ++r)
    for (int c = 0; c < mdp.transition().cols(); ++c) pt.push_back(mdp.transition()(r, c));
  std::vector<double> rt;
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a) rt.push_back(mdp.reward_table()(s, a));
  j["transition"] = pt;
  j["reward"] = rt;
  j["gamma"] = mdp.gamma();
  j["start_state"] = mdp.start_state();
  return j;
}

inline TabularMdp load_tabular_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open tabular mdp file: " + path);
  nlohmann::json j;
  in >> j;
  return parse_tabular_mdp(j);
}

/// Uniformly random dense MDP with rewards in [lo, hi]; used by offset-invariance sweeps.
inline TabularMdp random_tabular_mdp(int n_states, int n_actions, double gamma, RngStream& rng,
                                     double reward_lo = 0.2, double reward_hi = 2.0) {
  Eigen::MatrixXd P(n_states * n_actions, n_states);
  for (int r = 0; r < P.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < n_states; ++c) {
      P(r, c) = rng.uniform() + 0.05;
      sum += P(r, c);
    }
    P.row(r) /= sum;
  }
  Eigen::MatrixXd R(n_states, n_actions);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) R(s, a) = rng.uniform(reward_lo, reward_hi);
  return TabularMdp(n_states, n_actions, std::move(P), std::move(R), gamma, 0);
}

}  // namespace geopg
