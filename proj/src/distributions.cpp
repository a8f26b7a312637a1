#include "bid/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bid {
namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kLogInvSqrt2Pi = -0.91893853320467274178;

// Draw from the standard normal truncated to [lo, hi] where lo <= hi and
// the interval carries non-degenerate mass. Three exact rejection schemes,
// chosen deterministically from (lo, hi) so replay only depends on the RNG
// stream.
double sample_std_truncated(double lo, double hi, RngStream& rng) {
  if (hi < 0.0) {
    return -sample_std_truncated(-hi, -lo, rng);
  }
  const double mass = normal_interval_mass(lo, hi);
  if (lo <= 0.0) {
    // Window straddles the mode.
    if (mass >= 0.25) {
      for (;;) {
        const double z = rng.next_normal();
        if (z >= lo && z <= hi) return z;
      }
    }
    for (;;) {
      const double z = lo + (hi - lo) * rng.next_uniform();
      if (rng.next_uniform() <= std::exp(-0.5 * z * z)) return z;
    }
  }
  // One-sided window in the upper tail.
  if (mass >= 0.08) {
    for (;;) {
      const double z = rng.next_normal();
      if (z >= lo && z <= hi) return z;
    }
  }
  if (lo * (hi - lo) <= 1.3) {
    // Narrow tail slice: uniform proposal against the density maximum at lo.
    for (;;) {
      const double z = lo + (hi - lo) * rng.next_uniform();
      if (rng.next_uniform() <= std::exp(0.5 * (lo * lo - z * z))) return z;
    }
  }
  // Deep tail: shifted-exponential proposal with optimal rate.
  const double lambda = 0.5 * (lo + std::sqrt(lo * lo + 4.0));
  for (;;) {
    const double z = lo - std::log(rng.next_open_uniform()) / lambda;
    if (z > hi) continue;
    const double d = z - lambda;
    if (rng.next_uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

}  // namespace

void validate(const GtnParams& p) {
  if (!std::isfinite(p.mu)) {
    throw std::invalid_argument("truncated normal mu must be finite");
  }
  if (!(p.tau > 0.0) || !std::isfinite(p.tau)) {
    throw std::invalid_argument("truncated normal tau must be positive");
  }
  if (!(p.a < p.b)) {
    throw std::invalid_argument("truncated normal needs a < b");
  }
}

double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double normal_interval_mass(double lo, double hi) {
  if (lo > hi) return 0.0;
  if (lo > 0.0) {
    // Both endpoints in the upper tail; difference of complementary tails.
    return 0.5 * (std::erfc(lo * kInvSqrt2) - std::erfc(hi * kInvSqrt2));
  }
  if (hi < 0.0) {
    return 0.5 * (std::erfc(-hi * kInvSqrt2) - std::erfc(-lo * kInvSqrt2));
  }
  return std_normal_cdf(hi) - std_normal_cdf(lo);
}

double gtn_log_density(double x, const GtnParams& p, bool* degenerate) {
  validate(p);
  if (degenerate != nullptr) *degenerate = false;
  if (x < p.a || x > p.b) {
    return -std::numeric_limits<double>::infinity();
  }
  const double sqrt_tau = std::sqrt(p.tau);
  const double lo = (p.a - p.mu) * sqrt_tau;
  const double hi = (p.b - p.mu) * sqrt_tau;
  double mass = normal_interval_mass(lo, hi);
  if (mass < kDegenerateMass) {
    if (degenerate != nullptr) *degenerate = true;
    mass = kDegenerateMass;
  }
  const double z = (x - p.mu) * sqrt_tau;
  return kLogInvSqrt2Pi + 0.5 * std::log(p.tau) - 0.5 * z * z - std::log(mass);
}

double sample_gtn(const GtnParams& p, RngStream& rng) {
  validate(p);
  const double sqrt_tau = std::sqrt(p.tau);
  const double lo = (p.a - p.mu) * sqrt_tau;
  const double hi = (p.b - p.mu) * sqrt_tau;
  if (normal_interval_mass(lo, hi) < kDegenerateMass) {
    // All mass is numerically outside the window; land on the edge closest
    // to the parent mean.
    return (p.mu <= p.a) ? p.a : p.b;
  }
  const double z = sample_std_truncated(lo, hi, rng);
  double x = p.mu + z / sqrt_tau;
  if (x < p.a) x = p.a;
  if (x > p.b) x = p.b;
  return x;
}

double sample_inverse_gamma(double alpha, double beta, RngStream& rng) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("inverse gamma alpha must be positive");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("inverse gamma beta must be positive");
  }
  const double g = rng.next_gamma(alpha);
  return beta / std::max(g, 1e-300);
}

}  // namespace bid
