#include <doctest.h>

#include <cmath>

#include "geopg/constants.hpp"
#include "geopg/dp.hpp"
#include "geopg/fixtures.hpp"
#include "geopg/softmax_policy.hpp"

using namespace geopg;

namespace {

Eigen::VectorXd random_theta(int d, RngStream& rng, double scale = 1.0) {
  Eigen::VectorXd t(d);
  for (int i = 0; i < d; ++i) t[i] = scale * rng.normal();
  return t;
}

TabularMdp constant_reward_mdp(double r, double gamma = 0.9) {
  Eigen::MatrixXd p(4, 2);
  p << 0.6, 0.4,
       0.3, 0.7,
       0.5, 0.5,
       0.8, 0.2;
  Eigen::MatrixXd rw = Eigen::MatrixXd::Constant(2, 2, r);
  return TabularMdp(2, 2, p, rw, gamma, 0);
}

}  // namespace

TEST_CASE("exact_values: single state, single action, r=1, gamma=0.9 gives V=10") {
  Eigen::MatrixXd p(1, 1);
  p << 1.0;
  Eigen::MatrixXd r(1, 1);
  r << 1.0;
  TabularMdp mdp(1, 1, p, r, 0.9, 0);
  TabularSoftmaxPolicy pol(1, 1);
  const auto sol = dp::exact_values(mdp, pol, pol.init_theta());
  CHECK(sol.v[0] == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(sol.j_theta == doctest::Approx(10.0));
}

TEST_CASE("exact_values: constant reward gives V = r/(1-gamma) for any theta") {
  const auto mdp = constant_reward_mdp(0.7);
  TabularSoftmaxPolicy pol(2, 2);
  RngStream rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto theta = random_theta(4, rng, 2.0);
    const auto sol = dp::exact_values(mdp, pol, theta);
    for (int s = 0; s < 2; ++s) CHECK(sol.v[s] == doctest::Approx(7.0).epsilon(1e-12));
  }
}

TEST_CASE("exact_values: invariants hold on the fixtures") {
  RngStream rng(2);
  for (const auto& mdp : {fixtures::chain2(), fixtures::ring3(), fixtures::chain2_saddle()}) {
    TabularSoftmaxPolicy pol(mdp.n_states(), mdp.n_actions());
    const auto theta = random_theta(pol.dim(), rng);
    const auto sol = dp::exact_values(mdp, pol, theta);

    // Bellman residual of the policy evaluation
    const Eigen::MatrixXd pi = pol.prob_matrix(theta);
    const Eigen::MatrixXd p_pi = dp::policy_transition(mdp, pi);
    const Eigen::VectorXd r_pi = (pi.array() * mdp.reward_table().array()).rowwise().sum();
    const double residual = (sol.v - (r_pi + mdp.gamma() * p_pi * sol.v)).cwiseAbs().maxCoeff();
    CHECK(residual <= 1e-10);

    CHECK(sol.occupancy.minCoeff() >= 0.0);
    CHECK(std::abs(sol.occupancy.sum() - 1.0) <= 1e-10);
    CHECK(sol.q.cwiseAbs().maxCoeff() <= mdp.max_abs_reward() / (1.0 - mdp.gamma()) + 1e-12);

    // two independent evaluation routes agree
    const auto v_iter = dp::evaluate_by_iteration(mdp, pol, theta, 1e-12);
    CHECK((sol.v - v_iter).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("exact_occupancy: single state is the action distribution; gamma -> 0 concentrates on s0") {
  Eigen::MatrixXd p(2, 1);
  p << 1.0, 1.0;
  Eigen::MatrixXd r(1, 2);
  r << 1.0, 2.0;
  TabularMdp single(1, 2, p, r, 0.7, 0);
  TabularSoftmaxPolicy pol(1, 2);
  RngStream rng(5);
  const auto theta = random_theta(2, rng);
  const auto occ = dp::exact_occupancy(single, pol, theta);
  const auto probs = pol.probs(theta, 0);
  CHECK(std::abs(occ(0, 0) - probs[0]) <= 1e-12);
  CHECK(std::abs(occ(0, 1) - probs[1]) <= 1e-12);

  const auto mdp = fixtures::chain2(1e-6);
  TabularSoftmaxPolicy pol2(2, 2);
  const auto theta2 = random_theta(4, rng);
  const auto occ2 = dp::exact_occupancy(mdp, pol2, theta2);
  const auto p0 = pol2.probs(theta2, 0);
  double tv = std::abs(occ2(0, 0) - p0[0]) + std::abs(occ2(0, 1) - p0[1]) +
              std::abs(occ2(1, 0)) + std::abs(occ2(1, 1));
  CHECK(0.5 * tv <= 1e-5);
}

TEST_CASE("exact_policy_gradient: constant reward kills the gradient exactly") {
  const auto mdp = constant_reward_mdp(1.3);
  TabularSoftmaxPolicy pol(2, 2);
  RngStream rng(7);
  const auto g = dp::exact_policy_gradient(mdp, pol, random_theta(4, rng));
  CHECK(g.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("exact_policy_gradient: matches central differences of J on 20 random theta") {
  RngStream rng(11);
  for (const auto& mdp : {fixtures::chain2(), fixtures::ring3()}) {
    TabularSoftmaxPolicy pol(mdp.n_states(), mdp.n_actions());
    const auto j = [&](const Eigen::VectorXd& t) { return dp::exact_return(mdp, pol, t); };
    for (int trial = 0; trial < 20; ++trial) {
      const auto theta = random_theta(pol.dim(), rng);
      const auto g = dp::exact_policy_gradient(mdp, pol, theta);
      const auto fd = dp::fd_gradient(j, theta, 1e-5);
      CHECK((g - fd).norm() <= 1e-6 * (1.0 + g.norm()));
    }
  }
}

TEST_CASE("exact_policy_gradient: advantage form is identical to 1e-12") {
  const auto mdp = fixtures::chain2();
  TabularSoftmaxPolicy pol(2, 2);
  RngStream rng(13);
  const auto theta = random_theta(4, rng);
  const auto sol = dp::exact_values(mdp, pol, theta);
  Eigen::VectorXd g_adv = Eigen::VectorXd::Zero(4);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      g_adv += sol.occupancy(s, a) * (sol.q(s, a) - sol.v[s]) * pol.score(theta, s, a);
  g_adv /= (1.0 - mdp.gamma());
  const auto g = dp::exact_policy_gradient(mdp, pol, theta);
  CHECK((g - g_adv).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("exact_q_gradient: zero for constant rewards, fd match, norm bound") {
  const auto cmdp = constant_reward_mdp(2.0);
  TabularSoftmaxPolicy pol(2, 2);
  RngStream rng(17);
  CHECK(dp::exact_q_gradient(cmdp, pol, random_theta(4, rng)).cwiseAbs().maxCoeff() <= 1e-12);

  const auto mdp = fixtures::chain2();
  for (int trial = 0; trial < 10; ++trial) {
    const auto theta = random_theta(4, rng);
    const auto gq = dp::exact_q_gradient(mdp, pol, theta);
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a) {
        const auto fd = dp::fd_gradient(
            [&](const Eigen::VectorXd& t) { return dp::exact_values(mdp, pol, t).q(s, a); }, theta,
            1e-5);
        const Eigen::VectorXd row = gq.row(s * 2 + a).transpose();
        CHECK((row - fd).norm() <= 1e-5 * (1.0 + row.norm()));
      }

    // appendix norm bound with the analytic softmax score bound B = sqrt(2)
    const double bound = mdp.max_abs_reward() * std::sqrt(2.0) * mdp.gamma() /
                         ((1.0 - mdp.gamma()) * (1.0 - mdp.gamma()));
    for (int r = 0; r < gq.rows(); ++r) CHECK(gq.row(r).norm() <= bound + 1e-9);
  }
}

TEST_CASE("exact_hessian: symmetric, matches central second differences at 1e-3") {
  const auto mdp = fixtures::chain2();
  TabularSoftmaxPolicy pol(2, 2);
  RngStream rng(19);
  const auto j = [&](const Eigen::VectorXd& t) { return dp::exact_return(mdp, pol, t); };
  for (int trial = 0; trial < 10; ++trial) {
    const auto theta = random_theta(4, rng, 0.8);
    const auto h = dp::exact_hessian(mdp, pol, theta);
    CHECK((h - h.transpose()).norm() == 0.0);
    const auto fd = dp::fd_hessian(j, theta, 1e-3);
    CHECK((h - fd).norm() / std::max(1.0, fd.norm()) <= 1e-3);
  }
}

TEST_CASE("exact_hessian: constant reward reduces to the score-curvature term") {
  const auto mdp = constant_reward_mdp(1.5);
  TabularSoftmaxPolicy pol(2, 2);
  RngStream rng(23);
  const auto theta = random_theta(4, rng);
  const auto h = dp::exact_hessian(mdp, pol, theta);
  const auto sol = dp::exact_values(mdp, pol, theta);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(4, 4);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) {
      const auto sc = pol.score(theta, s, a);
      expect += sol.occupancy(s, a) * sol.q(s, a) *
                (sc * sc.transpose() + pol.score_hessian(theta, s, a));
    }
  expect /= (1.0 - mdp.gamma());
  // H12 vanishes because grad Q = 0; what is left collapses to zero by the
  // normalization identity, matching the zero Hessian of a constant J.
  CHECK((h - expect).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(h.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("value_iteration: constant reward ties break to action 0 everywhere") {
  const auto mdp = constant_reward_mdp(1.0);
  const auto res = dp::value_iteration(mdp, 1e-10);
  for (int s = 0; s < 2; ++s) CHECK(res.greedy[s] == 0);
}

TEST_CASE("value_iteration: converges within the contraction bound on chain2") {
  const auto mdp = fixtures::chain2();
  const double tol = 1e-10;
  const auto res = dp::value_iteration(mdp, tol);
  CHECK(res.residual <= tol);
  const double bound =
      std::ceil(std::log(tol * (1.0 - mdp.gamma()) / mdp.max_abs_reward()) / std::log(mdp.gamma()));
  CHECK(res.sweeps <= static_cast<int>(bound) + 1);
}

TEST_CASE("value_iteration: greedy policy is invariant to reward offsets on 50 random MDPs") {
  RngStream rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const int S = 2 + static_cast<int>(rng.uniform() * 5);   // <= 6
    const int A = 2 + static_cast<int>(rng.uniform() * 3);   // <= 4
    auto mdp_rng = rng.stream("mdp", trial);
    const auto mdp = random_tabular_mdp(S, A, 0.9, mdp_rng);
    const auto base = dp::value_iteration(mdp, 1e-10);
    for (double offset : {-5.0, 3.7}) {
      const auto shifted = dp::value_iteration(reshape_reward(mdp, offset), 1e-10);
      CHECK(shifted.greedy == base.greedy);
    }
  }
}

TEST_CASE("fd oracles: quadratic, linear, and step-size stability on chain2") {
  const auto sq = [](const Eigen::VectorXd& t) { return t.squaredNorm(); };
  Eigen::VectorXd theta(3);
  theta << 0.4, -1.2, 2.0;
  CHECK((dp::fd_gradient(sq, theta, 1e-5) - 2.0 * theta).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((dp::fd_hessian(sq, theta, 1e-3) - 2.0 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <=
        1e-6);

  const auto lin = [](const Eigen::VectorXd& t) { return 3.0 * t[0] - t[1]; };
  CHECK(dp::fd_hessian(lin, theta, 1e-3).cwiseAbs().maxCoeff() <= 1e-8);

  const auto mdp = fixtures::chain2();
  TabularSoftmaxPolicy pol(2, 2);
  RngStream rng(31);
  const auto th = random_theta(4, rng);
  const auto j = [&](const Eigen::VectorXd& t) { return dp::exact_return(mdp, pol, t); };
  const auto g4 = dp::fd_gradient(j, th, 1e-4);
  const auto g5 = dp::fd_gradient(j, th, 1e-5);
  CHECK((g4 - g5).norm() <= 1e-5 * (1.0 + g5.norm()));
}

TEST_CASE("gradient norm bound and Lipschitz inequalities with derived constants") {
  const auto mdp = fixtures::chain2();
  TabularSoftmaxPolicy pol(2, 2);
  // analytic upper bounds for the softmax family: ||score|| <= sqrt(2),
  // ||grad score|| <= 1 (trace bound), Lipschitz of grad score <= 2.
  const auto c = derive_constants(mdp.gamma(), mdp.max_abs_reward(), mdp.min_abs_reward(),
                                  std::sqrt(2.0), 1.0, 2.0, 0.0);
  RngStream rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t1 = random_theta(4, rng);
    Eigen::VectorXd t2 = t1;
    for (int i = 0; i < 4; ++i) t2[i] += 0.025 * rng.normal();
    const auto g1 = dp::exact_policy_gradient(mdp, pol, t1);
    const auto g2 = dp::exact_policy_gradient(mdp, pol, t2);
    CHECK(g1.norm() <= c.grad_norm_bound() + 1e-12);
    CHECK((g1 - g2).norm() <= c.l_grad * (t1 - t2).norm() + 1e-12);
    const auto h1 = dp::exact_hessian(mdp, pol, t1);
    const auto h2 = dp::exact_hessian(mdp, pol, t2);
    CHECK((h1 - h2).operatorNorm() <= c.rho * (t1 - t2).norm() + 1e-12);
  }
}
