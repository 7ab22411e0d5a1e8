#pragma once

#include <algorithm>
#include <cmath>

#include "geopg/errors.hpp"

namespace geopg {

enum class EstimatorKind { QHat, AdvDiff, AdvTd };

inline const char* to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::QHat: return "qhat";
    case EstimatorKind::AdvDiff: return "adv_diff";
    case EstimatorKind::AdvTd: return "adv_td";
  }
  return "?";
}

/// Problem-level regularity constants and every closed-form constant derived
/// from them: the gradient Lipschitz constant L, the Hessian Lipschitz
/// constant rho, the a.s. gradient bounds (l_hat, l_check, l_tilde), the CNC
/// floors (eta_hat, eta_check, eta_tilde) and the second-moment bound l_g per
/// estimator kind.
struct ProblemConstants {
  // inputs
  double gamma = 0.0;
  double u_r = 0.0;        // sup |R|
  double l_r = 0.0;        // inf |R| under the strict-sign hypothesis
  double b_theta = 0.0;    // sup ||score||
  double l_theta = 0.0;    // sup ||grad score||
  double rho_theta = 0.0;  // Lipschitz constant of grad score
  double l_i = 0.0;        // Fisher lower bound

  // derived
  double l_grad = 0.0;     // L
  double rho = 0.0;
  double l_hat = 0.0;
  double l_check = 0.0;
  double l_tilde = 0.0;
  double eta_hat = 0.0;
  double eta_check = 0.0;
  double eta_tilde = 0.0;

  double q_hat_bound() const { return u_r / (1.0 - std::sqrt(gamma)); }
  double grad_norm_bound() const { return b_theta * u_r / ((1.0 - gamma) * (1.0 - gamma)); }

  double l_for(EstimatorKind k) const {
    switch (k) {
      case EstimatorKind::QHat: return l_hat;
      case EstimatorKind::AdvDiff: return l_check;
      case EstimatorKind::AdvTd: return l_tilde;
    }
    return 0.0;
  }

  double eta_for(EstimatorKind k) const {
    switch (k) {
      case EstimatorKind::QHat: return eta_hat;
      case EstimatorKind::AdvDiff: return eta_check;
      case EstimatorKind::AdvTd: return eta_tilde;
    }
    return 0.0;
  }

  double l_g_for(EstimatorKind k) const {
    const double l = l_for(k);
    const double c = b_theta * u_r / ((1.0 - gamma) * (1.0 - gamma));
    return std::sqrt(2.0 * l * l + 2.0 * c * c);
  }
};

/// Populates every derived constant from the closed forms:
///   L      = U_R L_T / (1-g)^2 + (1+g) U_R B^2 / (1-g)^3
///   l_hat  = B U_R / ((1-g)(1-sqrt(g))),  l_check = 2 l_hat,
///   l_tilde = (2 + g - sqrt(g)) B U_R / ((1-g)(1-sqrt(g)))
///   eta_hat = L_R^2 L_I,
///   eta_check = 2 L_R^2 g^3 (1-sqrt(g)) / ((1-g^{3/2})(1-g)^2) L_I,
///   eta_tilde = (1+g^2)/2 * eta_check
///   rho    = U_R B L_T / (1-g)^2 + U_R B^3 (1+g) / (1-g)^3
///            + U_R B / (1-g) * max{ L_T, B^2 g/(1-g), rho_T / B,
///                                   L_T g/(1-g), (B^2 (1+g) + L_T (1-g) g)/(1-g)^2 }
inline ProblemConstants derive_constants(double gamma, double u_r, double l_r, double b_theta,
                                         double l_theta, double rho_theta, double l_i) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("derive_constants: gamma must lie in (0,1)");
  if (u_r < l_r || l_r < 0.0) throw ParameterError("derive_constants: need U_R >= L_R >= 0");
  if (b_theta < 0.0 || l_theta < 0.0 || rho_theta < 0.0 || l_i < 0.0)
    throw ParameterError("derive_constants: bounds must be non-negative");

  ProblemConstants c;
  c.gamma = gamma;
  c.u_r = u_r;
  c.l_r = l_r;
  c.b_theta = b_theta;
  c.l_theta = l_theta;
  c.rho_theta = rho_theta;
  c.l_i = l_i;

  const double og = 1.0 - gamma;
  const double sg = std::sqrt(gamma);
  const double osg = 1.0 - sg;

  c.l_grad = u_r * l_theta / (og * og) + (1.0 + gamma) * u_r * b_theta * b_theta / (og * og * og);

  c.l_hat = b_theta * u_r / (og * osg);
  c.l_check = 2.0 * c.l_hat;
  c.l_tilde = (2.0 + gamma - sg) * b_theta * u_r / (og * osg);

  const double var_floor = gamma * gamma * gamma * osg / ((1.0 - gamma * sg) * og * og);
  c.eta_hat = l_r * l_r * l_i;
  c.eta_check = 2.0 * l_r * l_r * var_floor * l_i;
  c.eta_tilde = (1.0 + gamma * gamma) * l_r * l_r * var_floor * l_i;

  const double hessian_term =
      std::max({l_theta, b_theta * b_theta * gamma / og,
                b_theta > 0.0 ? rho_theta / b_theta : 0.0, l_theta * gamma / og,
                (b_theta * b_theta * (1.0 + gamma) + l_theta * og * gamma) / (og * og)});
  c.rho = u_r * b_theta * l_theta / (og * og) + u_r * std::pow(b_theta, 3) * (1.0 + gamma) / (og * og * og) +
          u_r * b_theta / og * hessian_term;
  return c;
}

}  // namespace geopg
