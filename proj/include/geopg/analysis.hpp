#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "geopg/constants.hpp"
#include "geopg/errors.hpp"
#include "geopg/estimators.hpp"
#include "geopg/rng.hpp"

namespace geopg {
namespace analysis {

/// Outcome of one statistical check; pass <=> statistic <= threshold.
struct TestReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  long sample_size = 0;
  std::uint64_t seed = 0;
  std::string detail;

  static TestReport make(std::string name, double statistic, double threshold, long n,
                         std::uint64_t seed, std::string detail = "") {
    TestReport r;
    r.name = std::move(name);
    r.statistic = statistic;
    r.threshold = threshold;
    r.pass = statistic <= threshold;
    r.sample_size = n;
    r.seed = seed;
    r.detail = std::move(detail);
    return r;
  }
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  long n = 0;
};

/// Streaming mean/variance (Welford).
class Accumulator {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  long n() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double se() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }
  MeanSe result() const { return {mean(), se(), n()}; }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// z-test of a scalar or vector sampler against an exact value:
/// pass iff max_i |mean_i - exact_i| / SE_i <= z_max.
inline TestReport unbiasedness_test(const std::function<Eigen::VectorXd(RngStream&)>& sampler,
                                    const Eigen::VectorXd& exact, long n, double z_max,
                                    RngStream& rng, const std::string& name = "unbiasedness") {
  if (n < 100) throw ParameterError("unbiasedness_test: need n >= 100");
  const int d = static_cast<int>(exact.size());
  std::vector<Accumulator> acc(d);
  for (long i = 0; i < n; ++i) {
    auto rng_i = rng.stream("sample", static_cast<std::uint64_t>(i));
    const Eigen::VectorXd x = sampler(rng_i);
    if (x.size() != d) throw ParameterError("unbiasedness_test: sampler dimension mismatch");
    for (int c = 0; c < d; ++c) acc[c].add(x[c]);
  }
  double max_z = 0.0;
  bool degenerate = false;
  for (int c = 0; c < d; ++c) {
    const double se = acc[c].se();
    const double dev = std::abs(acc[c].mean() - exact[c]);
    if (se == 0.0) {
      if (dev > 1e-12) degenerate = true;  // zero variance but wrong mean
      continue;
    }
    max_z = std::max(max_z, dev / se);
  }
  auto rep = TestReport::make(name, degenerate ? std::numeric_limits<double>::infinity() : max_z,
                              z_max, n, rng.stream_id());
  if (degenerate) rep.detail = "zero sample variance with mean != exact";
  return rep;
}

inline TestReport unbiasedness_test(const std::function<double(RngStream&)>& sampler, double exact,
                                    long n, double z_max, RngStream& rng,
                                    const std::string& name = "unbiasedness") {
  return unbiasedness_test(
      [&](RngStream& r) { return Eigen::VectorXd::Constant(1, sampler(r)); },
      Eigen::VectorXd::Constant(1, exact), n, z_max, rng, name);
}

/// Bias-corrected estimate of ||grad J||^2 from B independent eval_pg draws:
/// ||mean_B g||^2 - tr(S)/B with S the unbiased sample covariance. Unbiased;
/// may be negative at small B.
template <class Env, class Policy>
double grad_norm_sq_estimate(const Env& env, const Policy& policy, const Eigen::VectorXd& theta,
                             EstimatorKind kind, long batch, RngStream& rng) {
  if (batch < 2) throw ParameterError("grad_norm_sq_estimate: need B >= 2");
  const int d = policy.dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  double sumsq = 0.0;  // sum of ||g_i||^2
  for (long i = 0; i < batch; ++i) {
    auto rng_i = rng.stream("sample", static_cast<std::uint64_t>(i));
    const auto g = eval_pg(kind, env, policy, theta, rng_i);
    mean += g.vector;
    sumsq += g.vector.squaredNorm();
  }
  mean /= static_cast<double>(batch);
  // tr(S) = (sum ||g_i||^2 - B ||mean||^2) / (B-1)
  const double tr =
      (sumsq - static_cast<double>(batch) * mean.squaredNorm()) / static_cast<double>(batch - 1);
  return mean.squaredNorm() - tr / static_cast<double>(batch);
}

/// Monte-Carlo estimate of the CNC energy E[(v^T g)^2] along a unit direction.
template <class Env, class Policy>
MeanSe cnc_estimate(const Env& env, const Policy& policy, const Eigen::VectorXd& theta,
                    EstimatorKind kind, const Eigen::VectorXd& direction, long n, RngStream& rng) {
  if (std::abs(direction.norm() - 1.0) > 1e-9)
    throw ParameterError("cnc_estimate: direction must be unit norm");
  Accumulator acc;
  for (long i = 0; i < n; ++i) {
    auto rng_i = rng.stream("sample", static_cast<std::uint64_t>(i));
    const auto g = eval_pg(kind, env, policy, theta, rng_i);
    const double proj = direction.dot(g.vector);
    acc.add(proj * proj);
  }
  return acc.result();
}

/// Monte-Carlo Fisher integral (1/n) sum score score^T over (s,a) ~ rho_theta.
template <class Env, class Policy>
Eigen::MatrixXd estimate_fisher(const Env& env, const Policy& policy, const Eigen::VectorXd& theta,
                                long n, RngStream& rng) {
  const int d = policy.dim();
  if (n < d) throw ParameterError("estimate_fisher: need n >= dim");
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(d, d);
  for (long i = 0; i < n; ++i) {
    auto rng_i = rng.stream("sample", static_cast<std::uint64_t>(i));
    const auto occ = rollout_to_occupancy_sample(env, policy, theta, rng_i);
    const Eigen::VectorXd sc = policy.score(theta, env.observe(occ.state), occ.action);
    f += sc * sc.transpose();
  }
  f /= static_cast<double>(n);
  return 0.5 * (f + f.transpose());
}

/// Minimum eigenvalue of a symmetric matrix restricted to the orthogonal
/// complement of span(null_basis). With an empty basis this is the plain
/// minimum eigenvalue. Used for Fisher floors of gauge-symmetric policies.
inline double restricted_min_eigenvalue(const Eigen::MatrixXd& m,
                                        const Eigen::MatrixXd& null_basis) {
  const int d = static_cast<int>(m.rows());
  if (null_basis.size() == 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    return eig.eigenvalues().minCoeff();
  }
  const int k = static_cast<int>(null_basis.cols());
  if (k >= d) throw ParameterError("restricted_min_eigenvalue: null space covers everything");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(null_basis);
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd complement = q.rightCols(d - k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(complement.transpose() * m * complement);
  return eig.eigenvalues().minCoeff();
}

template <class Policy>
Eigen::MatrixXd policy_gauge_basis(const Policy& policy) {
  if constexpr (requires { policy.gauge_null_basis(); }) {
    return policy.gauge_null_basis();
  } else {
    return Eigen::MatrixXd();
  }
}

/// Least-squares slope of log(value) against log(k) over the trailing window.
inline double rate_fit(const std::vector<std::pair<double, double>>& series, std::size_t window) {
  if (series.size() < 10) throw ParameterError("rate_fit: need at least 10 points");
  const std::size_t start = window >= series.size() ? 0 : series.size() - window;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (std::size_t i = start; i < series.size(); ++i) {
    const auto [k, v] = series[i];
    if (!(k > 0.0) || !(v > 0.0)) throw ParameterError("rate_fit: needs positive k and values");
    const double x = std::log(k), y = std::log(v);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw ParameterError("rate_fit: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

/// Plain linear least-squares slope (used for trend checks on signed series).
inline double linear_slope(const std::vector<std::pair<double, double>>& series) {
  if (series.size() < 2) throw ParameterError("linear_slope: need at least 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(series.size());
  for (const auto& [x, y] : series) {
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw ParameterError("linear_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace analysis
}  // namespace geopg
