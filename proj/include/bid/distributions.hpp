#pragma once

#include "bid/rng.hpp"

namespace bid {

// Truncated-normal parameters: parent mean mu and parent precision tau of
// the untruncated normal, support [a, b].
struct GtnParams {
  double mu = 0.0;
  double tau = 1.0;
  double a = -1.0;
  double b = 1.0;
};

// Throws std::invalid_argument unless mu is finite, tau > 0 and a < b.
void validate(const GtnParams& p);

double std_normal_cdf(double x);

// Phi(hi) - Phi(lo), evaluated through erfc so one-sided tail intervals keep
// relative precision.
double normal_interval_mass(double lo, double hi);

// A truncation window whose normal mass falls below this is treated as
// degenerate: effectively all density sits beyond double range on one side.
inline constexpr double kDegenerateMass = 1e-300;

// Log density of the truncated normal; -inf outside [a, b]. On a degenerate
// normalizer *degenerate is set and the normalizer is floored at
// kDegenerateMass so the result stays finite inside the window.
double gtn_log_density(double x, const GtnParams& p, bool* degenerate = nullptr);

// Draw from the truncated normal. Normal-proposal rejection when the window
// holds appreciable mass, uniform-proposal rejection on narrow windows, and
// a one-sided tilted-exponential scheme deep in a tail. A degenerate
// normalizer deterministically returns the boundary nearest mu.
double sample_gtn(const GtnParams& p, RngStream& rng);

// sigma2 ~ InvGamma(alpha, beta); alpha, beta > 0.
double sample_inverse_gamma(double alpha, double beta, RngStream& rng);

}  // namespace bid
