#pragma once

#include <cmath>

#include "geopg/errors.hpp"
#include "geopg/rng.hpp"

namespace geopg {

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) * 0.3989422804014326779; }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }
inline double normal_tail(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }  // P(X > x)

/// Normal mass on the standardized interval [a, b], evaluated tail-side to
/// avoid cancellation when the interval sits far from 0.
inline double normal_interval_mass(double a, double b) {
  if (a >= b) return 0.0;
  double z;
  if (a >= 0.0) z = normal_tail(a) - normal_tail(b);
  else if (b <= 0.0) z = normal_tail(-b) - normal_tail(-a);
  else z = 1.0 - normal_tail(b) - normal_tail(-a);
  return z;
}

/// N(mean, sigma^2) truncated to [lo, hi]. Stateless value type; all
/// derivatives are with respect to the mean (the parameterized quantity).
struct TruncatedNormal {
  double mean;
  double sigma;
  double lo;
  double hi;

  TruncatedNormal(double mean_, double sigma_, double lo_, double hi_)
      : mean(mean_), sigma(sigma_), lo(lo_), hi(hi_) {
    if (!(sigma > 0.0)) throw ParameterError("TruncatedNormal: sigma must be positive");
    if (!(lo < hi)) throw ParameterError("TruncatedNormal: empty support");
    if (!std::isfinite(mean)) throw NumericError("TruncatedNormal: non-finite mean");
  }

  double alpha() const { return (lo - mean) / sigma; }
  double beta() const { return (hi - mean) / sigma; }

  double mass() const {
    const double z = normal_interval_mass(alpha(), beta());
    if (!(z > 0.0)) throw NumericError("TruncatedNormal: support mass underflows (mean too far outside bounds)");
    return z;
  }

  double log_prob(double x) const {
    if (x < lo || x > hi) return -std::numeric_limits<double>::infinity();
    const double u = (x - mean) / sigma;
    return -0.5 * u * u - std::log(sigma) - 0.9189385332046727418 - std::log(mass());
  }

  /// d log p / d mean. `exact` includes the derivative of the truncation
  /// normalizer; exact=false reproduces the untruncated Gaussian score.
  double dlogp_dmean(double x, bool exact = true) const {
    double g = (x - mean) / (sigma * sigma);
    if (exact) {
      const double a = alpha(), b = beta();
      const double z = mass();
      // d(-log Z)/dmean = -(phi(a) - phi(b)) / (sigma Z)
      g -= (normal_pdf(a) - normal_pdf(b)) / (sigma * z);
    }
    return g;
  }

  /// d^2 log p / d mean^2 (independent of x).
  double d2logp_dmean2(bool exact = true) const {
    double h = -1.0 / (sigma * sigma);
    if (exact) {
      const double a = alpha(), b = beta();
      const double z = mass();
      const double n = normal_pdf(a) - normal_pdf(b);
      const double np = a * normal_pdf(a) - b * normal_pdf(b);
      h -= (np * z - n * n) / (sigma * sigma * z * z);
    }
    return h;
  }

  double sample(RngStream& rng) const { return mean + sigma * sample_standard(alpha(), beta(), rng); }

 private:
  // Uniform proposal with acceptance phi(z)/phi(m), m the in-interval mode.
  static double uniform_rejection(double a, double b, RngStream& rng) {
    const double m = std::clamp(0.0, a, b);
    for (;;) {
      const double z = rng.uniform(a, b);
      if (std::log(rng.uniform_open()) <= 0.5 * (m * m - z * z)) return z;
    }
  }

  // Robert's shifted-exponential proposal for the upper tail, a >= 0.
  static double tail_rejection(double a, double b, RngStream& rng) {
    const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
      const double z = a - std::log1p(-rng.uniform()) / lambda;
      if (z > b) continue;
      const double d = z - lambda;
      if (std::log(rng.uniform_open()) <= -0.5 * d * d) return z;
    }
  }

  static double sample_standard(double a, double b, RngStream& rng) {
    if (b < a) throw ParameterError("TruncatedNormal: empty support");
    if (b <= 0.0) return -sample_standard(-b, -a, rng);
    if (b - a < 1.0) return uniform_rejection(a, b, rng);
    if (a <= 0.0) {
      for (;;) {
        const double z = rng.normal();
        if (z >= a && z <= b) return z;
      }
    }
    if (a < 0.6) {
      for (;;) {
        const double z = rng.normal();
        if (z >= a && z <= b) return z;
      }
    }
    return tail_rejection(a, b, rng);
  }
};

}  // namespace geopg
