#pragma once

#include <Eigen/Dense>

#include "geopg/tabular_mdp.hpp"

namespace geopg {
namespace fixtures {

/// 2-state, 2-action chain with strictly positive rewards.
inline TabularMdp chain2(double gamma = 0.9) {
  Eigen::MatrixXd p(4, 2);
  p << 0.9, 0.1,   // (s0, a0)
       0.2, 0.8,   // (s0, a1)
       0.7, 0.3,   // (s1, a0)
       0.4, 0.6;   // (s1, a1)
  Eigen::MatrixXd r(2, 2);
  r << 1.0, 0.5,
       2.0, 0.3;
  return TabularMdp(2, 2, p, r, gamma, 0);
}

/// 3-state, 2-action ring with strictly positive rewards: action 0 advances
/// around the ring, action 1 mostly stays.
inline TabularMdp ring3(double gamma = 0.9) {
  Eigen::MatrixXd p(6, 3);
  p << 0.15, 0.85, 0.00,   // (s0, a0)
       0.90, 0.10, 0.00,   // (s0, a1)
       0.00, 0.15, 0.85,   // (s1, a0)
       0.00, 0.90, 0.10,   // (s1, a1)
       0.85, 0.00, 0.15,   // (s2, a0)
       0.10, 0.00, 0.90;   // (s2, a1)
  Eigen::MatrixXd r(3, 2);
  r << 0.2, 1.1,
       0.9, 0.4,
       1.5, 0.7;
  return TabularMdp(3, 2, p, r, gamma, 0);
}

/// chain2 variant with a softmax saddle plateau. Both actions in s1 are
/// identical and rewards depend on the state only, so with theta0 committed to
/// (s0, a0) the gradient is tiny while the Hessian keeps a strictly positive
/// top eigenvalue along the (s0, a1) escape direction.
inline TabularMdp chain2_saddle(double gamma = 0.9) {
  Eigen::MatrixXd p(4, 2);
  p << 0.95, 0.05,  // (s0, a0): stay on the mediocre state
       0.10, 0.90,  // (s0, a1): escape to the good state
       0.05, 0.95,  // (s1, a0)
       0.05, 0.95;  // (s1, a1)
  Eigen::MatrixXd r(2, 2);
  r << 1.0, 1.0,
       2.0, 2.0;
  return TabularMdp(2, 2, p, r, gamma, 0);
}

/// The plateau point used with chain2_saddle: committed to (s0, a0).
inline Eigen::VectorXd chain2_saddle_theta() {
  Eigen::VectorXd theta(4);
  theta << 4.0, -4.0, 0.0, 0.0;
  return theta;
}

/// Offset that flips chain2_saddle to mixed-sign rewards ({ -0.5, +0.5 }),
/// breaking the strict-sign CNC hypothesis while leaving grad J unchanged.
inline double chain2_saddle_mixed_offset() { return -1.5; }

}  // namespace fixtures
}  // namespace geopg
