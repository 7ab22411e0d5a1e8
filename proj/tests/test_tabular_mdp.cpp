#include <doctest.h>

#include <cmath>

#include "geopg/analysis.hpp"
#include "geopg/fixtures.hpp"
#include "geopg/tabular_mdp.hpp"

using namespace geopg;

TEST_CASE("tabular mdp: loader accepts the shipped fixtures and rejects bad rows") {
  const auto chain2 = load_tabular_mdp("fixtures/chain2.json");
  CHECK(chain2.n_states() == 2);
  CHECK(chain2.n_actions() == 2);
  CHECK(chain2.gamma() == doctest::Approx(0.9));
  CHECK(chain2.strict_sign_rewards());

  const auto ring3 = load_tabular_mdp("fixtures/ring3.json");
  CHECK(ring3.n_states() == 3);
  CHECK(ring3.strict_sign_rewards());

  nlohmann::json bad = to_json(chain2);
  bad["transition"][0] = 0.95;  // row sum now 1.05
  CHECK_THROWS_AS(parse_tabular_mdp(bad), ParameterError);

  nlohmann::json neg = to_json(chain2);
  neg["transition"][0] = -0.1;
  neg["transition"][1] = 1.1;
  CHECK_THROWS_AS(parse_tabular_mdp(neg), ParameterError);

  nlohmann::json g = to_json(chain2);
  g["gamma"] = 1.0;
  CHECK_THROWS_AS(parse_tabular_mdp(g), ParameterError);
}

TEST_CASE("tabular mdp: loader tolerates 1e-10 row-sum error and renormalizes") {
  auto j = to_json(fixtures::chain2());
  j["transition"][0] = 0.9 + 5e-10;
  const auto mdp = parse_tabular_mdp(j);
  CHECK(std::abs(mdp.transition_row(0, 0).sum() - 1.0) <= 1e-12);
}

TEST_CASE("tabular mdp: deterministic one-hot rows give the unique successor") {
  Eigen::MatrixXd p(2, 2);
  p << 0.0, 1.0,
       1.0, 0.0;
  Eigen::MatrixXd r(2, 1);
  r << 0.5, 0.25;
  TabularMdp mdp(2, 1, p, r, 0.5, 0);
  RngStream rng(3);
  for (int i = 0; i < 200; ++i) {
    CHECK(mdp.step(0, 0, rng).next == 1);
    CHECK(mdp.step(1, 0, rng).next == 0);
  }
}

TEST_CASE("tabular mdp: successor frequencies match P within 3 binomial SE") {
  const auto mdp = fixtures::chain2();
  RngStream rng(17);
  const long n = 100000;
  long count_s0 = 0;
  for (long i = 0; i < n; ++i)
    if (mdp.step(0, 0, rng).next == 0) ++count_s0;
  const double p = 0.9;
  const double se = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::abs(static_cast<double>(count_s0) / n - p) <= 3.0 * se);
}

TEST_CASE("tabular mdp: out-of-range indices raise parameter errors") {
  const auto mdp = fixtures::chain2();
  RngStream rng(1);
  CHECK_THROWS_AS(mdp.step(2, 0, rng), ParameterError);
  CHECK_THROWS_AS(mdp.step(0, 2, rng), ParameterError);
  CHECK_THROWS_AS(mdp.reward(-1, 0), ParameterError);
}

TEST_CASE("reshape_reward: offset 0 is bitwise identical, offsets shift the table") {
  const auto mdp = fixtures::chain2();
  const auto same = reshape_reward(mdp, 0.0);
  CHECK(same.reward_table() == mdp.reward_table());
  CHECK(same.transition() == mdp.transition());

  const auto shifted = reshape_reward(mdp, -5.0);
  CHECK(shifted.reward(0, 0) == doctest::Approx(-4.0));
  CHECK(shifted.gamma() == mdp.gamma());
  CHECK(shifted.strict_sign_rewards());  // all negative now, still one sign
  const auto mixed = reshape_reward(mdp, -0.7);  // rewards straddle zero
  CHECK(!mixed.strict_sign_rewards());
  const auto pos = reshape_reward(mdp, 3.7);
  CHECK(pos.strict_sign_rewards());
}

TEST_CASE("tabular mdp: config round trip preserves the model") {
  const auto mdp = fixtures::ring3();
  const auto back = parse_tabular_mdp(to_json(mdp));
  CHECK(back.transition() == mdp.transition());
  CHECK(back.reward_table() == mdp.reward_table());
  CHECK(back.gamma() == mdp.gamma());
  CHECK(back.start_state() == mdp.start_state());
}
