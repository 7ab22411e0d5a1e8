#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "geopg/constants.hpp"
#include "geopg/errors.hpp"
#include "geopg/estimators.hpp"
#include "geopg/rng.hpp"

namespace geopg {

/// alpha_k = k^-a for k >= 1 (alpha_0 := 1), or a constant.
struct StepsizeSchedule {
  enum class Mode { Diminishing, Constant };
  Mode mode = Mode::Constant;
  double value = 0.05;  // exponent a in (0,1) for Diminishing, alpha for Constant

  static StepsizeSchedule diminishing(double a) {
    if (!(a > 0.0 && a < 1.0)) throw ParameterError("StepsizeSchedule: exponent must lie in (0,1)");
    return {Mode::Diminishing, a};
  }
  static StepsizeSchedule constant(double alpha) {
    if (!(alpha > 0.0)) throw ParameterError("StepsizeSchedule: alpha must be positive");
    return {Mode::Constant, alpha};
  }

  double at(std::int64_t k) const {
    if (mode == Mode::Constant) return value;
    return k == 0 ? 1.0 : std::pow(static_cast<double>(k), -value);
  }
};

struct RunRecord {
  std::int64_t k = 0;
  double stepsize = 0.0;
  double grad_norm = 0.0;
  double exact_grad_norm = std::numeric_limits<double>::quiet_NaN();
  double return_estimate = std::numeric_limits<double>::quiet_NaN();
  bool checkpoint = false;
  std::uint64_t theta_hash = 0;
};

/// Optional instrumentation for the optimization loops.
struct RunHooks {
  std::function<double(const Eigen::VectorXd&)> exact_grad_norm;               // tabular oracle
  std::function<double(const Eigen::VectorXd&, RngStream&)> return_estimate;   // MC return
  int eval_every = 0;                                                          // 0: never
  // called after each update with (k, theta_before, g, stepsize)
  std::function<void(std::int64_t, const Eigen::VectorXd&, const Eigen::VectorXd&, double)> on_step;
};

inline std::uint64_t hash_theta(const Eigen::VectorXd& theta) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (int i = 0; i < theta.size(); ++i) {
    std::uint64_t bits;
    static_assert(sizeof(double) == sizeof(std::uint64_t));
    std::memcpy(&bits, &theta[i], sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  }
  return h;
}

template <class State, class Action>
struct RunResult {
  std::vector<RunRecord> records;
  Eigen::VectorXd theta_final;     // last iterate
  Eigen::VectorXd theta_returned;  // MRPG: uniform draw from the checkpoint set; RPG: last iterate
};

/// RPG: theta_{k+1} = theta_k + alpha_k g_k with one eval_pg sample per step,
/// each on the substream ("iter", k) of `rng`. Deterministic given the seed.
template <class Env, class Policy>
RunResult<typename Env::State, typename Env::Action> rpg_run(
    const Env& env, const Policy& policy, Eigen::VectorXd theta, const StepsizeSchedule& schedule,
    EstimatorKind kind, std::int64_t n_iters, RngStream& rng, const RunHooks& hooks = {},
    const ProblemConstants* constants = nullptr) {
  if (n_iters < 1) throw ParameterError("rpg_run: need at least one iteration");
  RunResult<typename Env::State, typename Env::Action> out;
  out.records.reserve(static_cast<std::size_t>(n_iters));
  for (std::int64_t k = 0; k < n_iters; ++k) {
    auto rng_k = rng.stream("iter", static_cast<std::uint64_t>(k));
    const auto g = eval_pg(kind, env, policy, theta, rng_k, constants);
    const double alpha = schedule.at(k);

    RunRecord rec;
    rec.k = k;
    rec.stepsize = alpha;
    rec.grad_norm = g.vector.norm();
    rec.theta_hash = hash_theta(theta);
    if (hooks.exact_grad_norm) rec.exact_grad_norm = hooks.exact_grad_norm(theta);
    if (hooks.return_estimate && hooks.eval_every > 0 && k % hooks.eval_every == 0) {
      auto rng_eval = rng_k.stream("eval");
      rec.return_estimate = hooks.return_estimate(theta, rng_eval);
    }
    out.records.push_back(rec);

    if (hooks.on_step) hooks.on_step(k, theta, g.vector, alpha);
    theta += alpha * g.vector;
    if (!theta.allFinite()) throw NumericError("rpg_run: non-finite iterate");
  }
  out.theta_final = theta;
  out.theta_returned = theta;
  return out;
}

/// Table-1 schedule: target accuracy/confidence, the two stepsizes, the
/// checkpoint period, the improvement threshold, the iteration budget, and a
/// per-constraint report.
struct MrpgSchedule {
  double epsilon = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::int64_t k_thre = 1;
  double j_thre = 0.0;
  double big_k = 0.0;  // theoretical K; may be astronomically large
  double lambda = 0.0;

  // constants actually used (after any feasibility capping)
  double c1 = 1.0, c2 = 0.5, c4 = 8.0, c5 = 2.0, c_prime = 1.0, c_log = 8.0;
  // Table-1 "Value" entries before capping, kept for reporting
  double beta_table = 0.0;
  double j_thre_table = 0.0;

  struct ConstraintRow {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
  };
  std::vector<ConstraintRow> constraint_report;

  bool all_satisfied() const {
    for (const auto& r : constraint_report)
      if (!r.satisfied) return false;
    return true;
  }
};

struct MrpgTargets {
  double epsilon = 0.1;
  double delta = 0.1;
  double j_gap_bound = 0.0;  // <= 0: use 2 U_R / (1-gamma)
  double c1 = 1.0, c2 = -1.0 /* c1/2 */, c4 = 8.0, c5 = 2.0, c_prime = 1.0, c_log = 8.0;
};

/// Materializes the Table-1 schedule for the chosen estimator kind.
///
/// Every Table-1 constraint row is enforced as a hard inequality: the Value
/// entries are used as starting points and lowered (beta jointly with J_thre,
/// k_thre raised through its log fixed point) until all rows hold. At desk
/// scale some rows bind below the published Value entries; the uncapped
/// values are retained in beta_table / j_thre_table.
inline MrpgSchedule build_mrpg_schedule(const ProblemConstants& constants, EstimatorKind kind,
                                        const MrpgTargets& t) {
  if (!(t.epsilon > 0.0 && t.epsilon < 1.0) || !(t.delta > 0.0 && t.delta < 1.0))
    throw ParameterError("build_mrpg_schedule: epsilon and delta must lie in (0,1)");
  const double l = constants.l_for(kind);
  const double big_l = constants.l_grad;
  const double eta = constants.eta_for(kind);
  const double rho = constants.rho;
  const double l_g = constants.l_g_for(kind);
  if (!(eta > 0.0))
    throw InfeasibleScheduleError("build_mrpg_schedule: CNC degenerate (eta = 0, e.g. L_R = 0)");
  if (!(l > 0.0 && big_l > 0.0 && rho > 0.0))
    throw InfeasibleScheduleError("build_mrpg_schedule: need positive l, L and rho");

  MrpgSchedule s;
  s.epsilon = t.epsilon;
  s.delta = t.delta;
  s.c1 = t.c1;
  s.c2 = t.c2 > 0.0 ? t.c2 : t.c1 / 2.0;
  s.c4 = t.c4;
  s.c5 = t.c5;
  s.c_prime = t.c_prime;
  s.c_log = t.c_log;

  const double eps = t.epsilon, delta = t.delta;
  const double lam = std::sqrt(rho * eps);
  s.lambda = lam;

  const double beta_value = s.c1 * eps * eps / (2.0 * l * l * big_l);
  const double j_value = s.c2 * eta * std::pow(eps, 4) / (2.0 * l * l * big_l);
  s.beta_table = beta_value;
  s.j_thre_table = j_value;

  // beta rows 1 & 3, then the joint (beta, J_thre) fixed point with rows 2, 4, 5.
  double beta = std::min(beta_value, eta * lam * lam / (24.0 * big_l * std::pow(l, 3) * rho));
  double j_thre = 0.0;
  for (int round = 0; round < 200; ++round) {
    j_thre = std::min({j_value, beta * eps * eps / 2.0, eta * beta * lam * lam / (48.0 * l * rho)});
    const double cap = std::sqrt(j_thre * delta / (2.0 * big_l * l * l));
    if (beta <= cap * (1.0 + 1e-15)) break;
    beta = cap;
    if (round == 199)
      throw InfeasibleScheduleError("build_mrpg_schedule: beta/J_thre fixed point did not close");
  }
  if (!(beta > 0.0) || !(j_thre > 0.0))
    throw InfeasibleScheduleError("build_mrpg_schedule: degenerate beta or J_thre");

  // alpha(k) = min(beta / sqrt(k), c' eta beta lam^3 / (24 L l^3 rho)); raise
  // k_thre to the smallest integer satisfying its log constraint.
  const double alpha_cap = s.c_prime * eta * beta * std::pow(lam, 3) / (24.0 * big_l * std::pow(l, 3) * rho);
  double k = 1.0;
  double alpha = 0.0;
  bool closed = false;
  for (int round = 0; round < 100; ++round) {
    alpha = std::min(beta / std::sqrt(k), alpha_cap);
    const double arg = big_l * l_g / (eta * beta * alpha * lam);
    if (!(arg > 1.0))
      throw InfeasibleScheduleError("build_mrpg_schedule: log constraint argument not > 1");
    const double required = s.c_log * std::log(arg) / (alpha * lam);
    if (required <= k) {
      closed = true;
      break;
    }
    k = required;
  }
  if (!closed) throw InfeasibleScheduleError("build_mrpg_schedule: k_thre fixed point did not close in 100 rounds");
  k = std::ceil(k);
  alpha = std::min(beta / std::sqrt(k), alpha_cap);

  const double j_gap = t.j_gap_bound > 0.0 ? t.j_gap_bound
                                           : 2.0 * constants.u_r / (1.0 - constants.gamma);
  const double big_k = std::ceil(s.c5 * j_gap * k / (delta * j_thre));

  s.alpha = alpha;
  s.beta = beta;
  s.j_thre = j_thre;
  s.k_thre = static_cast<std::int64_t>(std::min(k, 9.0e18));
  s.big_k = std::max(big_k, k);

  const auto row = [&](const std::string& name, double lhs, double rhs, bool ge = false) {
    const double slack = 1.0 + 1e-9;
    const bool ok = ge ? lhs * slack >= rhs : lhs <= rhs * slack;
    s.constraint_report.push_back({name, lhs, rhs, ok});
  };
  row("beta <= eps^2/(2 l^2 L)", beta, eps * eps / (2.0 * l * l * big_l));
  row("beta <= sqrt(J_thre delta/(2 L l^2))", beta, std::sqrt(j_thre * delta / (2.0 * big_l * l * l)));
  row("beta <= eta lam^2/(24 L l^3 rho)", beta, eta * lam * lam / (24.0 * big_l * std::pow(l, 3) * rho));
  row("J_thre <= beta eps^2/2", j_thre, beta * eps * eps / 2.0);
  row("J_thre <= eta beta lam^2/(48 l rho)", j_thre, eta * beta * lam * lam / (48.0 * l * rho));
  row("alpha <= beta/sqrt(k_thre)", alpha, beta / std::sqrt(k));
  row("alpha <= c' eta beta lam^3/(24 L l^3 rho)", alpha, alpha_cap);
  row("k_thre >= c log(L l_g/(eta beta alpha lam))/(alpha lam)", k,
      s.c_log * std::log(big_l * l_g / (eta * beta * alpha * lam)) / (alpha * lam), true);
  row("K >= 2 (J*-J0) k_thre/(delta J_thre)", s.big_k, 2.0 * j_gap * k / (delta * j_thre), true);

  if (!s.all_satisfied())
    throw InfeasibleScheduleError("build_mrpg_schedule: a Table-1 constraint row cannot be satisfied");
  return s;
}

/// MRPG: every k_thre-th iterate is checkpointed into the return set and
/// updated with the enlarged stepsize beta; all other iterates use alpha.
/// After `n_iters` updates (big_k, possibly capped by the caller) the returned
/// theta is drawn uniformly from the checkpoint set on a dedicated stream.
template <class Env, class Policy>
RunResult<typename Env::State, typename Env::Action> mrpg_run(
    const Env& env, const Policy& policy, Eigen::VectorXd theta, const MrpgSchedule& schedule,
    EstimatorKind kind, std::int64_t n_iters, RngStream& rng, const RunHooks& hooks = {},
    const ProblemConstants* constants = nullptr) {
  if (n_iters < 1) throw ParameterError("mrpg_run: need at least one iteration");
  if (schedule.k_thre < 1 || !(schedule.alpha > 0.0) || !(schedule.beta > 0.0) ||
      schedule.alpha > schedule.beta)
    throw ParameterError("mrpg_run: schedule must satisfy 0 < alpha <= beta, k_thre >= 1");

  RunResult<typename Env::State, typename Env::Action> out;
  out.records.reserve(static_cast<std::size_t>(n_iters));
  std::vector<Eigen::VectorXd> checkpoints;
  for (std::int64_t k = 0; k <= n_iters; ++k) {
    const bool is_checkpoint = (k % schedule.k_thre == 0);
    if (is_checkpoint) checkpoints.push_back(theta);
    if (k == n_iters) break;

    auto rng_k = rng.stream("iter", static_cast<std::uint64_t>(k));
    const auto g = eval_pg(kind, env, policy, theta, rng_k, constants);
    const double step = is_checkpoint ? schedule.beta : schedule.alpha;

    RunRecord rec;
    rec.k = k;
    rec.stepsize = step;
    rec.grad_norm = g.vector.norm();
    rec.checkpoint = is_checkpoint;
    rec.theta_hash = hash_theta(theta);
    if (hooks.exact_grad_norm) rec.exact_grad_norm = hooks.exact_grad_norm(theta);
    if (hooks.return_estimate && hooks.eval_every > 0 && k % hooks.eval_every == 0) {
      auto rng_eval = rng_k.stream("eval");
      rec.return_estimate = hooks.return_estimate(theta, rng_eval);
    }
    out.records.push_back(rec);

    if (hooks.on_step) hooks.on_step(k, theta, g.vector, step);
    theta += step * g.vector;
    if (!theta.allFinite()) throw NumericError("mrpg_run: non-finite iterate");
  }
  out.theta_final = theta;

  auto rng_ret = rng.stream("mrpg.return");
  const auto idx = static_cast<std::size_t>(rng_ret.uniform() * static_cast<double>(checkpoints.size()));
  out.theta_returned = checkpoints[std::min(idx, checkpoints.size() - 1)];
  return out;
}

}  // namespace geopg
