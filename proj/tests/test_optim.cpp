#include <doctest.h>

#include <cmath>
#include <vector>

#include "geopg/analysis.hpp"
#include "geopg/dp.hpp"
#include "geopg/fixtures.hpp"
#include "geopg/optim.hpp"
#include "geopg/softmax_policy.hpp"

using namespace geopg;

namespace {

TabularMdp constant_reward_mdp(double r, double gamma = 0.9) {
  Eigen::MatrixXd p(4, 2);
  p << 0.6, 0.4,
       0.3, 0.7,
       0.5, 0.5,
       0.8, 0.2;
  Eigen::MatrixXd rw = Eigen::MatrixXd::Constant(2, 2, r);
  return TabularMdp(2, 2, p, rw, gamma, 0);
}

ProblemConstants normalized_constants(double eta, double l_g = 2.0) {
  // unit l, L, rho; eta and l_g chosen per test. gamma/u_r/b_theta are picked
  // so l_g_for reproduces l_g when l = 1: l_g^2 = 2 + 2 (b u/(1-g)^2)^2.
  ProblemConstants c;
  c.gamma = 0.5;
  c.u_r = 0.25 * std::sqrt(l_g * l_g / 2.0 - 1.0) * 2.0;  // b u/(1-g)^2 = sqrt(l_g^2/2 - 1)
  c.l_r = 0.1;
  c.b_theta = 1.0;
  c.l_theta = 1.0;
  c.rho_theta = 1.0;
  c.l_i = 1.0;
  c.l_grad = 1.0;
  c.rho = 1.0;
  c.l_hat = 1.0;
  c.l_check = 1.0;
  c.l_tilde = 1.0;
  c.eta_hat = eta;
  c.eta_check = eta;
  c.eta_tilde = eta;
  return c;
}

}  // namespace

TEST_CASE("stepsize schedules: k^-a with alpha_0 = 1, and constants") {
  const auto dim = StepsizeSchedule::diminishing(0.5);
  CHECK(dim.at(0) == 1.0);
  CHECK(dim.at(4) == doctest::Approx(0.5));
  CHECK(dim.at(100) == doctest::Approx(0.1));
  const auto con = StepsizeSchedule::constant(0.05);
  CHECK(con.at(0) == 0.05);
  CHECK(con.at(1000) == 0.05);
  CHECK_THROWS_AS(StepsizeSchedule::diminishing(1.0), ParameterError);
  CHECK_THROWS_AS(StepsizeSchedule::constant(0.0), ParameterError);
}

TEST_CASE("rpg_run: deterministic given the seed, and the update identity replays exactly") {
  const auto mdp = fixtures::chain2();
  TabularSoftmaxPolicy pol(2, 2);
  const auto theta0 = pol.init_theta();

  std::vector<Eigen::VectorXd> thetas, grads;
  std::vector<double> steps;
  RunHooks hooks;
  hooks.on_step = [&](std::int64_t, const Eigen::VectorXd& th, const Eigen::VectorXd& g, double a) {
    thetas.push_back(th);
    grads.push_back(g);
    steps.push_back(a);
  };
  RngStream rng1(7), rng2(7);
  const auto r1 = rpg_run(mdp, pol, theta0, StepsizeSchedule::diminishing(0.5),
                          EstimatorKind::QHat, 500, rng1, hooks);
  const auto r2 = rpg_run(mdp, pol, theta0, StepsizeSchedule::diminishing(0.5),
                          EstimatorKind::QHat, 500, rng2);
  CHECK(r1.theta_final == r2.theta_final);
  for (std::size_t k = 0; k < r1.records.size(); ++k)
    CHECK(r1.records[k].theta_hash == r2.records[k].theta_hash);

  // replay: theta_{k+1} - theta_k == alpha_k g_k bitwise
  for (std::size_t k = 0; k + 1 < thetas.size(); ++k) {
    const Eigen::VectorXd expect = thetas[k] + steps[k] * grads[k];
    CHECK(expect == thetas[k + 1]);
  }
  const Eigen::VectorXd last = thetas.back() + steps.back() * grads.back();
  CHECK(last == r1.theta_final);
}

TEST_CASE("rpg_run: zero-gradient environment drifts with zero mean across 30 seeds") {
  const auto mdp = constant_reward_mdp(1.0);
  TabularSoftmaxPolicy pol(2, 2);
  const auto theta0 = pol.init_theta();
  std::vector<analysis::Accumulator> acc(4);
  for (int seed = 0; seed < 30; ++seed) {
    RngStream rng(1000 + seed);
    const auto r = rpg_run(mdp, pol, theta0, StepsizeSchedule::constant(0.05),
                           EstimatorKind::QHat, 400, rng);
    const Eigen::VectorXd disp = r.theta_final - theta0;  // = sum alpha_k g_k
    for (int c = 0; c < 4; ++c) acc[c].add(disp[c]);
  }
  for (int c = 0; c < 4; ++c) CHECK(std::abs(acc[c].mean()) <= 4.0 * acc[c].se());
}

TEST_CASE("mrpg_run: stepsize pattern and checkpoint flags over the whole log") {
  const auto mdp = fixtures::chain2();
  TabularSoftmaxPolicy pol(2, 2);
  MrpgSchedule s;
  s.alpha = 0.01;
  s.beta = 0.05;
  s.k_thre = 7;
  RngStream rng(11);
  const auto r = mrpg_run(mdp, pol, pol.init_theta(), s, EstimatorKind::AdvDiff, 100, rng);
  CHECK(r.records.size() == 100);
  for (const auto& rec : r.records) {
    const bool cp = rec.k % 7 == 0;
    CHECK(rec.checkpoint == cp);
    CHECK(rec.stepsize == (cp ? 0.05 : 0.01));
  }
}

TEST_CASE("mrpg_run: k_thre = 1 degenerates to constant-beta RPG with all checkpoints") {
  const auto mdp = fixtures::chain2();
  TabularSoftmaxPolicy pol(2, 2);
  MrpgSchedule s;
  s.alpha = 0.05;
  s.beta = 0.05;
  s.k_thre = 1;
  RngStream rng(13);
  const auto r = mrpg_run(mdp, pol, pol.init_theta(), s, EstimatorKind::QHat, 50, rng);
  for (const auto& rec : r.records) {
    CHECK(rec.checkpoint);
    CHECK(rec.stepsize == 0.05);
  }
}

TEST_CASE("mrpg_run: big_k = k_thre returns one of {theta_0, theta_k_thre} with frequency 1/2") {
  const auto mdp = fixtures::chain2();
  TabularSoftmaxPolicy pol(2, 2);
  MrpgSchedule s;
  s.alpha = 0.02;
  s.beta = 0.1;
  s.k_thre = 5;
  const auto theta0 = pol.init_theta();
  const auto h0 = hash_theta(theta0);
  long got_theta0 = 0;
  const long n = 10000;
  for (long i = 0; i < n; ++i) {
    RngStream rng(50000 + i);
    const auto r = mrpg_run(mdp, pol, theta0, s, EstimatorKind::QHat, 5, rng);
    if (hash_theta(r.theta_returned) == h0) ++got_theta0;
    else CHECK(r.theta_returned == r.theta_final);
  }
  CHECK(std::abs(static_cast<double>(got_theta0) / n - 0.5) <= 0.02);
}

TEST_CASE("build_mrpg_schedule: normalized constants reproduce the capped Table-1 values") {
  const auto c = normalized_constants(48.0);
  MrpgTargets t;
  t.delta = 0.5;

  t.epsilon = 0.2;
  const auto s2 = build_mrpg_schedule(c, EstimatorKind::QHat, t);
  CHECK(s2.all_satisfied());
  // the delta row binds: beta = eps^2 delta / 4, J_thre = beta eps^2 / 2
  CHECK(s2.beta == doctest::Approx(0.2 * 0.2 * 0.5 / 4.0).epsilon(1e-9));
  CHECK(s2.j_thre == doctest::Approx(s2.beta * 0.04 / 2.0).epsilon(1e-9));
  CHECK(s2.beta_table == doctest::Approx(0.02).epsilon(1e-12));  // c1 eps^2/(2 l^2 L)

  t.epsilon = 0.1;
  const auto s1 = build_mrpg_schedule(c, EstimatorKind::QHat, t);
  CHECK(s1.all_satisfied());
  CHECK(s1.beta_table == doctest::Approx(0.005).epsilon(1e-12));  // the Table-1 Value entry

  // halving epsilon: beta scales by exactly 1/4, J_thre by exactly 1/16
  t.epsilon = 0.05;
  const auto s05 = build_mrpg_schedule(c, EstimatorKind::QHat, t);
  CHECK(s1.beta / s05.beta == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(s1.j_thre / s05.j_thre == doctest::Approx(16.0).epsilon(1e-9));
  CHECK(s2.beta / s1.beta == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(s2.j_thre / s1.j_thre == doctest::Approx(16.0).epsilon(1e-9));

  // schedule internals
  CHECK(s1.alpha <= s1.beta / std::sqrt(static_cast<double>(s1.k_thre)) * (1 + 1e-12));
  CHECK(s1.k_thre >= 1);
  CHECK(s1.big_k >= static_cast<double>(s1.k_thre));
  CHECK(s1.lambda == doctest::Approx(std::sqrt(0.1)));
}

TEST_CASE("build_mrpg_schedule: degenerate CNC (eta = 0) is an infeasible-schedule error") {
  const auto c = normalized_constants(0.0);
  MrpgTargets t;
  CHECK_THROWS_AS(build_mrpg_schedule(c, EstimatorKind::QHat, t), InfeasibleScheduleError);

  // same through derive_constants with L_R = 0
  const auto dc = derive_constants(0.9, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0);
  CHECK_THROWS_AS(build_mrpg_schedule(dc, EstimatorKind::AdvDiff, t), InfeasibleScheduleError);
}

TEST_CASE("build_mrpg_schedule: rejects bad targets") {
  const auto c = normalized_constants(48.0);
  MrpgTargets t;
  t.epsilon = 0.0;
  CHECK_THROWS_AS(build_mrpg_schedule(c, EstimatorKind::QHat, t), ParameterError);
  t.epsilon = 0.1;
  t.delta = 1.0;
  CHECK_THROWS_AS(build_mrpg_schedule(c, EstimatorKind::QHat, t), ParameterError);
}

TEST_CASE("reshape_reward: value-iteration greedy policies unchanged by offsets (fixture spot check)") {
  const auto mdp = fixtures::ring3();
  const auto base = dp::value_iteration(mdp, 1e-10);
  for (double offset : {-5.0, 3.7}) {
    const auto shifted = dp::value_iteration(reshape_reward(mdp, offset), 1e-10);
    CHECK(shifted.greedy == base.greedy);
  }
}

TEST_CASE("chain2_saddle fixture: plateau point verified by the DP oracle") {
  const auto mdp = fixtures::chain2_saddle();
  CHECK(mdp.strict_sign_rewards());
  TabularSoftmaxPolicy pol(2, 2);
  const auto theta = fixtures::chain2_saddle_theta();
  const auto grad = dp::exact_policy_gradient(mdp, pol, theta);
  const auto hess = dp::exact_hessian(mdp, pol, theta);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
  CHECK(grad.norm() <= 0.02);                        // near-stationary plateau
  CHECK(eig.eigenvalues().maxCoeff() >= 0.01);       // strictly positive curvature
  // big headroom above the plateau
  const double j_saddle = dp::exact_return(mdp, pol, theta);
  Eigen::VectorXd committed(4);
  committed << -8.0, 8.0, 0.0, 0.0;
  CHECK(dp::exact_return(mdp, pol, committed) > j_saddle + 5.0);
}
