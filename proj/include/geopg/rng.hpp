#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "geopg/errors.hpp"

namespace geopg {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer. The generator is counter-based: output = mix(state += golden).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Inverse normal CDF, Wichura's AS 241 (PPND16). |error| < 1e-15 over (0,1).
inline double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("inverse_normal_cdf: p outside (0,1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -v : v;
}

}  // namespace detail

/// A counter-based pseudo-random stream.
///
/// Each stream is identified by a 64-bit id derived from the root seed and a
/// path of names/indices; generation advances a counter and hashes it, so
/// identically-named streams reproduce bit-identical draws regardless of what
/// any other stream consumed. This is what makes the horizon draws, the inner
/// rollouts, and the occupancy sample of one estimator call mutually
/// independent, and whole runs replayable from (seed, config).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : id_(detail::mix64(seed ^ detail::kGolden)), state_(id_) {}

  /// Derives an independent named child stream. Derivation uses the stream id
  /// (not the current counter), so naming is stable under interleaving.
  RngStream stream(std::string_view name) const {
    return RngStream(id_, detail::mix64(id_ ^ detail::fnv1a(name)));
  }
  RngStream stream(std::string_view name, std::uint64_t index) const {
    const std::uint64_t h = detail::mix64(detail::fnv1a(name) ^ detail::mix64(index + 0x9E37));
    return RngStream(id_, detail::mix64(id_ ^ h));
  }

  std::uint64_t stream_id() const { return id_; }

  std::uint64_t next_u64() {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1) — safe for logs and inverse CDFs.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via inverse CDF: exactly one uniform per draw.
  double normal() { return detail::inverse_normal_cdf(uniform_open()); }

  /// Index in [0, n) proportional to non-negative weights (need not sum to 1).
  template <class Vec>
  int categorical(const Vec& weights) {
    double total = 0.0;
    const int n = static_cast<int>(weights.size());
    for (int i = 0; i < n; ++i) total += weights[i];
    double u = uniform() * total;
    for (int i = 0; i < n; ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return n - 1;
  }

 private:
  RngStream(std::uint64_t /*parent_id*/, std::uint64_t derived) : id_(derived), state_(derived) {}

  std::uint64_t id_;
  std::uint64_t state_;
};

/// Draws T with P(T = t) = p (1-p)^t on {0, 1, 2, ...} by inverting the CDF,
/// so a single uniform suffices.
inline long sample_geometric(double success_prob, RngStream& rng) {
  if (!(success_prob > 0.0) || success_prob > 1.0)
    throw ParameterError("sample_geometric: success probability must be in (0,1]");
  if (success_prob == 1.0) return 0;
  const double u = rng.uniform();
  // T = floor(log(1-u) / log(1-p)); u in [0,1) keeps the argument positive.
  const double t = std::floor(std::log1p(-u) / std::log1p(-success_prob));
  return static_cast<long>(t);
}

}  // namespace geopg
