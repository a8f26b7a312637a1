#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "bid/id_core.hpp"
#include "bid/importance.hpp"
#include "bid/rng.hpp"

namespace bid {

enum class Mode { kGbt, kIid };

struct ChainConfig {
  std::size_t k = 0;
  std::size_t iterations = 1000;
  std::size_t burn_in = 100;
  std::size_t thinning = 5;
  std::uint64_t seed = 0;
  Mode mode = Mode::kGbt;
  std::size_t swaps_per_sweep = 1;
  bool early_stop = false;
  double early_stop_rel_change = 1e-6;
  std::size_t monitored_entries = 25;
};

void validate(const ChainConfig& c, Eigen::Index n);

// Mutable sampler state with cached X = masked A, the residual A - X Y and
// per-column squared norms of X.
struct ChainState {
  Matrix y;
  StateVector r;
  double sigma2 = 1.0;
  Matrix x;
  Matrix residual;
  Vector col_norms2;
};

struct GtnPosterior {
  double mu = 0.0;
  double tau = 1.0;
};

struct Trace {
  std::vector<double> losses;
  std::vector<std::vector<std::uint8_t>> retained_r;
  std::vector<double> retained_sigma2;
  std::vector<std::pair<std::size_t, std::size_t>> monitored_entries;
  std::vector<std::vector<double>> monitored_y;
  std::vector<double> selection_scores;
  double min_loss_post_burn_in = 0.0;
  double mean_loss_post_burn_in = 0.0;
  std::size_t retained_count = 0;
  std::size_t iterations_run = 0;
};

// Draw the starting state: a uniformly random size-k basis, coefficients
// from their priors, noise variance from its prior.
ChainState init_chain(const Matrix& a, const Hyperparams& h, const ChainConfig& cfg,
                      RngStream& rng);

// Rebuild X, the residual and the column norms from (a, r, y) exactly.
void refresh_caches(const Matrix& a, ChainState& s);

// Conditional posterior of y_kl given everything else. A zeroed x column
// returns the prior unchanged.
GtnPosterior y_posterior(const ChainState& s, const Hyperparams& h, std::size_t k,
                         std::size_t l);

// Resample y_kl and patch residual column l in place.
void cond_update_y(const Matrix& a, ChainState& s, const Hyperparams& h,
                   std::size_t k, std::size_t l, RngStream& rng);

// Log likelihood ratio of swapping basis column j for interpolated column i,
// evaluated through the rank-2 residual identity without recomputation.
double likelihood_log_ratio(const Matrix& a, const ChainState& s, std::size_t j,
                            std::size_t i);

// Odds o = exp(log_prior_odds + log_likelihood_ratio) accepted with
// probability o / (1 + o), evaluated without overflow.
double swap_acceptance_probability(double log_prior_odds, double log_likelihood_ratio);

// One exchange move: propose (j, i) uniformly, accept by the swap odds, and
// patch the caches. Returns whether the swap happened. GBT mode forbids an
// importance vector, IID mode requires one.
bool swap_step(const Matrix& a, ChainState& s, Mode mode,
               const ImportanceVector* importance, RngStream& rng);

void cond_update_sigma2(const Matrix& a, ChainState& s, const Hyperparams& h,
                        RngStream& rng);

// Full sampler: per iteration runs the swap moves, a periodic exact cache
// rebuild, the noise update and a complete coefficient sweep. Loss is the
// running mean squared error; post-burn-in statistics cover retained
// iterations only.
Trace run_chain(const Matrix& a, const Hyperparams& h, const ChainConfig& cfg,
                const ImportanceVector* importance = nullptr,
                ChainState* final_state = nullptr);

// Indices of the m largest scores, ties broken toward the lower index.
std::vector<std::size_t> top_m_select(const std::vector<double>& scores, std::size_t m);

// Sample autocorrelation at lags 0..max_lag, lag 0 normalized to one. A
// zero-variance series is 1 at lag 0 and 0 elsewhere.
std::vector<double> autocorrelation(const std::vector<double>& samples,
                                    std::size_t max_lag);

std::vector<double> averaged_autocorrelation(
    const std::vector<std::vector<double>>& series, std::size_t max_lag);

}  // namespace bid
