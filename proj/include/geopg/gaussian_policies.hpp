#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <utility>

#include "geopg/errors.hpp"
#include "geopg/rng.hpp"
#include "geopg/trunc_normal.hpp"

namespace geopg {

/// Truncated-Gaussian policy with linear mean mu(s) = features(s)^T theta,
/// fixed sigma, actions truncated to [-action_bound, action_bound].
///
/// The score includes the exact derivative of the truncation normalizer;
/// `paper_approximate_score(true)` switches to the untruncated-Gaussian score
/// (a - mu) phi(s) / sigma^2.
class TruncGaussLinearPolicy {
 public:
  using Obs = Eigen::VectorXd;
  using Action = double;
  using FeatureFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  TruncGaussLinearPolicy(int dim, double sigma, double action_bound, FeatureFn features = nullptr)
      : dim_(dim), sigma_(sigma), bound_(action_bound), features_(std::move(features)) {
    if (dim <= 0) throw ParameterError("TruncGaussLinearPolicy: bad dimension");
    if (!(sigma > 0.0) || !(action_bound > 0.0))
      throw ParameterError("TruncGaussLinearPolicy: sigma and action bound must be positive");
  }

  int dim() const { return dim_; }
  double sigma() const { return sigma_; }
  double action_bound() const { return bound_; }

  void paper_approximate_score(bool on) { approximate_score_ = on; }

  Eigen::VectorXd init_theta() const { return Eigen::VectorXd::Zero(dim_); }

  Eigen::VectorXd features(const Eigen::VectorXd& obs) const {
    Eigen::VectorXd f = features_ ? features_(obs) : obs;
    if (f.size() != dim_) throw ParameterError("TruncGaussLinearPolicy: feature dimension mismatch");
    return f;
  }

  double mean(const Eigen::VectorXd& theta, const Eigen::VectorXd& obs) const {
    if (theta.size() != dim_) throw ParameterError("TruncGaussLinearPolicy: theta has wrong dimension");
    const double m = features(obs).dot(theta);
    if (!std::isfinite(m)) throw NumericError("TruncGaussLinearPolicy: non-finite mean");
    return m;
  }

  double sample(const Eigen::VectorXd& theta, const Eigen::VectorXd& obs, RngStream& rng) const {
    return dist(theta, obs).sample(rng);
  }

  double log_prob(const Eigen::VectorXd& theta, const Eigen::VectorXd& obs, double a) const {
    return dist(theta, obs).log_prob(a);
  }

  Eigen::VectorXd score(const Eigen::VectorXd& theta, const Eigen::VectorXd& obs, double a) const {
    const double g = dist(theta, obs).dlogp_dmean(a, !approximate_score_);
    return g * features(obs);
  }

  Eigen::MatrixXd score_hessian(const Eigen::VectorXd& theta, const Eigen::VectorXd& obs,
                                double /*a*/) const {
    const double h = dist(theta, obs).d2logp_dmean2(!approximate_score_);
    const Eigen::VectorXd f = features(obs);
    Eigen::MatrixXd m = h * (f * f.transpose());
    return 0.5 * (m + m.transpose());  // exact symmetry despite fused kernels
  }

 private:
  TruncatedNormal dist(const Eigen::VectorXd& theta, const Eigen::VectorXd& obs) const {
    return TruncatedNormal(mean(theta, obs), sigma_, -bound_, bound_);
  }

  int dim_;
  double sigma_;
  double bound_;
  FeatureFn features_;
  bool approximate_score_ = false;
};

/// Truncated-Gaussian policy whose mean is a small MLP: two hidden layers of
/// `hidden` units with softmax activations, tanh output scaled to the action
/// bound. Parameters are packed [W1, b1, W2, b2, w3, b3] row-major.
/// Gradients of the mean are computed by a manual backward pass; second
/// derivatives are not provided.
class TruncGaussMlpPolicy {
 public:
  using Obs = Eigen::Vector3d;
  using Action = double;

  TruncGaussMlpPolicy(int n_inputs, int hidden, double sigma, double action_bound)
      : n_in_(n_inputs), nh_(hidden), sigma_(sigma), bound_(action_bound) {
    if (n_inputs <= 0 || hidden <= 0) throw ParameterError("TruncGaussMlpPolicy: bad layer sizes");
    if (!(sigma > 0.0) || !(action_bound > 0.0))
      throw ParameterError("TruncGaussMlpPolicy: sigma and action bound must be positive");
  }

  int dim() const { return nh_ * n_in_ + nh_ + nh_ * nh_ + nh_ + nh_ + 1; }
  double sigma() const { return sigma_; }
  double action_bound() const { return bound_; }

  /// Uniform [-0.5, 0.5] scaled by 1/sqrt(fan_in), per layer, seeded.
  Eigen::VectorXd init_theta(RngStream& rng) const {
    Eigen::VectorXd theta(dim());
    int off = 0;
    const auto fill = [&](int count, int fan_in) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (int i = 0; i < count; ++i) theta[off++] = rng.uniform(-0.5, 0.5) * scale;
    };
    fill(nh_ * n_in_ + nh_, n_in_);   // W1, b1
    fill(nh_ * nh_ + nh_, nh_);      // W2, b2
    fill(nh_ + 1, nh_);              // w3, b3
    return theta;
  }

  template <class Derived>
  double mean(const Eigen::VectorXd& theta, const Eigen::MatrixBase<Derived>& obs) const {
    Forward f;
    return forward(theta, obs, f);
  }

  template <class Derived>
  double sample(const Eigen::VectorXd& theta, const Eigen::MatrixBase<Derived>& obs,
                RngStream& rng) const {
    return dist(theta, obs).sample(rng);
  }

  template <class Derived>
  double log_prob(const Eigen::VectorXd& theta, const Eigen::MatrixBase<Derived>& obs,
                  double a) const {
    return dist(theta, obs).log_prob(a);
  }

  template <class Derived>
  Eigen::VectorXd score(const Eigen::VectorXd& theta, const Eigen::MatrixBase<Derived>& obs,
                        double a) const {
    Forward f;
    const double mu = forward(theta, obs, f);
    const double dmu = TruncatedNormal(mu, sigma_, -bound_, bound_).dlogp_dmean(a);
    return dmu * mean_gradient(theta, obs, f);
  }

  template <class Derived>
  Eigen::MatrixXd score_hessian(const Eigen::VectorXd&, const Eigen::MatrixBase<Derived>&,
                                double) const {
    throw CapabilityError("TruncGaussMlpPolicy: score_hessian not supported for the MLP policy");
  }

 private:
  struct Forward {
    Eigen::VectorXd x;        // input
    Eigen::VectorXd h1, h2;   // softmax activations
    double z3 = 0.0;          // pre-tanh output
  };

  static Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
    Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
    return e / e.sum();
  }

  template <class Derived>
  double forward(const Eigen::VectorXd& theta, const Eigen::MatrixBase<Derived>& obs,
                 Forward& f) const {
    if (theta.size() != dim()) throw ParameterError("TruncGaussMlpPolicy: theta has wrong dimension");
    f.x = obs;
    int off = 0;
    const auto W1 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        theta.data() + off, nh_, n_in_);
    off += nh_ * n_in_;
    const auto b1 = theta.segment(off, nh_); off += nh_;
    const auto W2 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        theta.data() + off, nh_, nh_);
    off += nh_ * nh_;
    const auto b2 = theta.segment(off, nh_); off += nh_;
    const auto w3 = theta.segment(off, nh_); off += nh_;
    const double b3 = theta[off];

    f.h1 = softmax(W1 * f.x + b1);
    f.h2 = softmax(W2 * f.h1 + b2);
    f.z3 = w3.dot(f.h2) + b3;
    const double mu = bound_ * std::tanh(f.z3);
    if (!std::isfinite(mu)) throw NumericError("TruncGaussMlpPolicy: non-finite mean");
    return mu;
  }

  // Backpropagates d mu / d theta through tanh and the two softmax layers.
  template <class Derived>
  Eigen::VectorXd mean_gradient(const Eigen::VectorXd& theta, const Eigen::MatrixBase<Derived>&,
                                const Forward& f) const {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim());
    int off = 0;
    const int oW1 = off; off += nh_ * n_in_;
    const int ob1 = off; off += nh_;
    const int oW2 = off; off += nh_ * nh_;
    const int ob2 = off; off += nh_;
    const int ow3 = off; off += nh_;
    const int ob3 = off;

    const auto W2 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        theta.data() + oW2, nh_, nh_);
    const auto w3 = theta.segment(ow3, nh_);

    const double t = std::tanh(f.z3);
    const double dz3 = bound_ * (1.0 - t * t);

    grad.segment(ow3, nh_) = dz3 * f.h2;
    grad[ob3] = dz3;

    // softmax backward: dL/dz = h .* (dL/dh - <h, dL/dh>)
    Eigen::VectorXd dh2 = dz3 * w3;
    Eigen::VectorXd dz2 = f.h2.array() * (dh2.array() - f.h2.dot(dh2));
    for (int i = 0; i < nh_; ++i)
      grad.segment(oW2 + i * nh_, nh_) = dz2[i] * f.h1;
    grad.segment(ob2, nh_) = dz2;

    Eigen::VectorXd dh1 = W2.transpose() * dz2;
    Eigen::VectorXd dz1 = f.h1.array() * (dh1.array() - f.h1.dot(dh1));
    for (int i = 0; i < nh_; ++i)
      grad.segment(oW1 + i * n_in_, n_in_) = dz1[i] * f.x;
    grad.segment(ob1, nh_) = dz1;
    return grad;
  }

  template <class Derived>
  TruncatedNormal dist(const Eigen::VectorXd& theta, const Eigen::MatrixBase<Derived>& obs) const {
    Forward f;
    return TruncatedNormal(forward(theta, obs, f), sigma_, -bound_, bound_);
  }

  int n_in_;
  int nh_;
  double sigma_;
  double bound_;
};

}  // namespace geopg
