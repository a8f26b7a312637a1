#include "bid/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bid/distributions.hpp"

namespace bid {
namespace {

constexpr std::size_t kCacheRebuildPeriod = 50;
constexpr std::size_t kEarlyStopWindow = 10;

void check_matrix(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw std::invalid_argument("chain input matrix is empty");
  }
  if (!a.allFinite()) {
    throw std::invalid_argument("chain input matrix has non-finite entries");
  }
}

void check_importance(const ChainConfig& cfg, const ImportanceVector* importance,
                      Eigen::Index n) {
  if (cfg.mode == Mode::kIid) {
    if (importance == nullptr) {
      throw std::invalid_argument("priority mode needs an importance vector");
    }
    if (importance->values.size() != static_cast<std::size_t>(n)) {
      throw std::invalid_argument("importance length does not match column count");
    }
  } else if (importance != nullptr) {
    throw std::invalid_argument("plain mode takes no importance vector");
  }
}

// Evenly spaced distinct indices over [0, n), at most count of them.
std::vector<std::size_t> linspace_indices(Eigen::Index n, std::size_t count) {
  std::vector<std::size_t> out;
  if (count == 0 || n <= 0) return out;
  const auto un = static_cast<std::size_t>(n);
  if (count >= un) {
    out.resize(un);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  for (std::size_t t = 0; t < count; ++t) {
    out.push_back(count == 1 ? 0 : t * (un - 1) / (count - 1));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> monitored_grid(Eigen::Index n,
                                                                std::size_t target) {
  std::vector<std::pair<std::size_t, std::size_t>> grid;
  if (target == 0) return grid;
  const auto side = static_cast<std::size_t>(
      std::lround(std::sqrt(static_cast<double>(target))));
  const auto axis = linspace_indices(n, std::max<std::size_t>(side, 1));
  for (std::size_t k : axis) {
    for (std::size_t l : axis) grid.emplace_back(k, l);
  }
  return grid;
}

}  // namespace

void validate(const ChainConfig& c, Eigen::Index n) {
  if (c.k < 1 || c.k > static_cast<std::size_t>(n)) {
    throw std::invalid_argument("basis size must be between 1 and the column count");
  }
  if (c.iterations < 1) throw std::invalid_argument("need at least one iteration");
  if (c.burn_in >= c.iterations) {
    throw std::invalid_argument("burn-in must be shorter than the chain");
  }
  if (c.thinning < 1) throw std::invalid_argument("thinning must be positive");
  if (c.swaps_per_sweep < 1) {
    throw std::invalid_argument("swaps per sweep must be positive");
  }
  if (c.early_stop && !(c.early_stop_rel_change > 0.0)) {
    throw std::invalid_argument("early-stop threshold must be positive");
  }
}

ChainState init_chain(const Matrix& a, const Hyperparams& h, const ChainConfig& cfg,
                      RngStream& rng) {
  check_matrix(a);
  const Eigen::Index n = a.cols();
  validate(cfg, n);
  validate(h, n);

  ChainState s;
  // Uniform k-subset by a partial shuffle.
  std::vector<std::size_t> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t t = 0; t < cfg.k; ++t) {
    const std::size_t span = pool.size() - t;
    std::swap(pool[t], pool[t + static_cast<std::size_t>(rng.next_below(span))]);
  }
  s.r.bits.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t t = 0; t < cfg.k; ++t) s.r.bits[pool[t]] = 1;

  s.y.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      s.y(k, l) = sample_gtn(GtnParams{h.mu(k, l), h.tau(k, l), h.a, h.b}, rng);
    }
  }
  s.sigma2 = sample_inverse_gamma(h.alpha_sigma, h.beta_sigma, rng);
  refresh_caches(a, s);
  return s;
}

void refresh_caches(const Matrix& a, ChainState& s) {
  s.x = derive_x(a, s.r);
  s.residual = a - s.x * s.y;
  s.col_norms2.resize(a.cols());
  for (Eigen::Index n = 0; n < a.cols(); ++n) {
    s.col_norms2(n) = s.x.col(n).squaredNorm();
  }
}

GtnPosterior y_posterior(const ChainState& s, const Hyperparams& h, std::size_t k,
                         std::size_t l) {
  const auto ek = static_cast<Eigen::Index>(k);
  const auto el = static_cast<Eigen::Index>(l);
  if (ek >= s.y.rows() || el >= s.y.cols()) {
    throw std::out_of_range("coefficient index out of range");
  }
  GtnPosterior post{h.mu(ek, el), h.tau(ek, el)};
  const double norm2 = s.col_norms2(ek);
  if (norm2 == 0.0) return post;
  // The masked data column k explains residual column l plus its own current
  // contribution norm2 * y_kl.
  const double dot = s.x.col(ek).dot(s.residual.col(el)) + norm2 * s.y(ek, el);
  post.tau = norm2 / s.sigma2 + h.tau(ek, el);
  post.mu = (dot / s.sigma2 + h.tau(ek, el) * h.mu(ek, el)) / post.tau;
  return post;
}

void cond_update_y(const Matrix& a, ChainState& s, const Hyperparams& h,
                   std::size_t k, std::size_t l, RngStream& rng) {
  if (a.cols() != s.y.cols()) {
    throw std::invalid_argument("state does not match the data matrix");
  }
  const GtnPosterior post = y_posterior(s, h, k, l);
  const double draw = sample_gtn(GtnParams{post.mu, post.tau, h.a, h.b}, rng);
  const auto ek = static_cast<Eigen::Index>(k);
  const auto el = static_cast<Eigen::Index>(l);
  const double old = s.y(ek, el);
  s.y(ek, el) = draw;
  if (s.col_norms2(ek) != 0.0) {
    s.residual.col(el) += s.x.col(ek) * (old - draw);
  }
}

double likelihood_log_ratio(const Matrix& a, const ChainState& s, std::size_t j,
                            std::size_t i) {
  if (j >= s.r.size() || i >= s.r.size()) {
    throw std::out_of_range("swap index out of range");
  }
  if (!s.r.bits[j] || s.r.bits[i]) {
    throw std::invalid_argument("swap needs a basis j and an interpolated i");
  }
  const auto ej = static_cast<Eigen::Index>(j);
  const auto ei = static_cast<Eigen::Index>(i);
  const Vector vj = s.y.row(ej).transpose();
  const Vector vi = s.y.row(ei).transpose();
  const auto uj = a.col(ej);
  const auto ui = a.col(ei);
  // After the swap the residual gains dR = a_j y_j - a_i y_i; the Frobenius
  // change is 2 <R, dR> + |dR|^2, both reduced to vector products.
  const double inner = uj.dot(s.residual * vj) - ui.dot(s.residual * vi);
  const double delta2 = uj.squaredNorm() * vj.squaredNorm() -
                        2.0 * uj.dot(ui) * vj.dot(vi) +
                        ui.squaredNorm() * vi.squaredNorm();
  return -(2.0 * inner + delta2) / (2.0 * s.sigma2);
}

double swap_acceptance_probability(double log_prior_odds, double log_likelihood_ratio) {
  const double t = log_prior_odds + log_likelihood_ratio;
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

bool swap_step(const Matrix& a, ChainState& s, Mode mode,
               const ImportanceVector* importance, RngStream& rng) {
  if (mode == Mode::kIid && importance == nullptr) {
    throw std::invalid_argument("priority mode needs an importance vector");
  }
  if (mode == Mode::kGbt && importance != nullptr) {
    throw std::invalid_argument("plain mode takes no importance vector");
  }
  const auto basis = s.r.basis_set();
  const auto interp = s.r.interpolated_set();
  if (basis.empty() || interp.empty()) return false;
  const std::size_t j = basis[static_cast<std::size_t>(rng.next_below(basis.size()))];
  const std::size_t i =
      interp[static_cast<std::size_t>(rng.next_below(interp.size()))];
  const double log_prior =
      mode == Mode::kIid ? std::log(prior_odds(*importance, j, i)) : 0.0;
  const double accept =
      swap_acceptance_probability(log_prior, likelihood_log_ratio(a, s, j, i));
  if (!(rng.next_uniform() < accept)) return false;

  const auto ej = static_cast<Eigen::Index>(j);
  const auto ei = static_cast<Eigen::Index>(i);
  s.residual += a.col(ej) * s.y.row(ej) - a.col(ei) * s.y.row(ei);
  s.x.col(ej).setZero();
  s.x.col(ei) = a.col(ei);
  s.col_norms2(ej) = 0.0;
  s.col_norms2(ei) = a.col(ei).squaredNorm();
  s.r.bits[j] = 0;
  s.r.bits[i] = 1;
  return true;
}

void cond_update_sigma2(const Matrix& a, ChainState& s, const Hyperparams& h,
                        RngStream& rng) {
  const double mn = static_cast<double>(a.rows()) * static_cast<double>(a.cols());
  const double alpha = 0.5 * mn + h.alpha_sigma;
  const double beta = 0.5 * s.residual.squaredNorm() + h.beta_sigma;
  s.sigma2 = sample_inverse_gamma(alpha, beta, rng);
}

Trace run_chain(const Matrix& a, const Hyperparams& h, const ChainConfig& cfg,
                const ImportanceVector* importance, ChainState* final_state) {
  check_matrix(a);
  validate(cfg, a.cols());
  validate(h, a.cols());
  check_importance(cfg, importance, a.cols());

  RngStream rng(cfg.seed);
  ChainState s = init_chain(a, h, cfg, rng);

  Trace tr;
  tr.monitored_entries = monitored_grid(a.cols(), cfg.monitored_entries);
  const double mn = static_cast<double>(a.rows()) * static_cast<double>(a.cols());
  const auto n = static_cast<std::size_t>(a.cols());
  double retained_loss_sum = 0.0;
  double retained_loss_min = 0.0;

  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    for (std::size_t w = 0; w < cfg.swaps_per_sweep; ++w) {
      swap_step(a, s, cfg.mode, importance, rng);
    }
    if (t > 0 && t % kCacheRebuildPeriod == 0) refresh_caches(a, s);
    cond_update_sigma2(a, s, h, rng);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        cond_update_y(a, s, h, k, l, rng);
      }
    }
    const double loss = s.residual.squaredNorm() / mn;
    tr.losses.push_back(loss);
    tr.iterations_run = t + 1;

    if (t >= cfg.burn_in && (t - cfg.burn_in) % cfg.thinning == 0) {
      tr.retained_r.push_back(s.r.bits);
      tr.retained_sigma2.push_back(s.sigma2);
      std::vector<double> snapshot;
      snapshot.reserve(tr.monitored_entries.size());
      for (const auto& [k, l] : tr.monitored_entries) {
        snapshot.push_back(s.y(static_cast<Eigen::Index>(k),
                               static_cast<Eigen::Index>(l)));
      }
      tr.monitored_y.push_back(std::move(snapshot));
      if (tr.retained_r.size() == 1 || loss < retained_loss_min) {
        retained_loss_min = loss;
      }
      retained_loss_sum += loss;
    }

    if (cfg.early_stop && t + 1 >= cfg.burn_in + 2 * kEarlyStopWindow) {
      const auto end = tr.losses.end();
      const double recent =
          std::accumulate(end - kEarlyStopWindow, end, 0.0) / kEarlyStopWindow;
      const double earlier = std::accumulate(end - 2 * kEarlyStopWindow,
                                             end - kEarlyStopWindow, 0.0) /
                             kEarlyStopWindow;
      const double scale = std::max(std::fabs(earlier), 1e-300);
      if (std::fabs(recent - earlier) <= cfg.early_stop_rel_change * scale) break;
    }
  }

  tr.retained_count = tr.retained_r.size();
  tr.selection_scores.assign(n, 0.0);
  for (const auto& bits : tr.retained_r) {
    for (std::size_t c = 0; c < n; ++c) tr.selection_scores[c] += bits[c];
  }
  if (tr.retained_count > 0) {
    for (auto& score : tr.selection_scores) {
      score /= static_cast<double>(tr.retained_count);
    }
    tr.min_loss_post_burn_in = retained_loss_min;
    tr.mean_loss_post_burn_in =
        retained_loss_sum / static_cast<double>(tr.retained_count);
  }
  if (final_state != nullptr) *final_state = std::move(s);
  return tr;
}

std::vector<std::size_t> top_m_select(const std::vector<double>& scores,
                                      std::size_t m) {
  if (m > scores.size()) {
    throw std::invalid_argument("cannot select more columns than exist");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  order.resize(m);
  return order;
}

std::vector<double> autocorrelation(const std::vector<double>& samples,
                                    std::size_t max_lag) {
  if (samples.size() <= max_lag) {
    throw std::invalid_argument("series shorter than the requested lag");
  }
  const std::size_t n = samples.size();
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                      static_cast<double>(n);
  std::vector<double> acf(max_lag + 1, 0.0);
  double c0 = 0.0;
  for (double v : samples) c0 += (v - mean) * (v - mean);
  acf[0] = 1.0;
  if (c0 == 0.0) return acf;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) {
      c += (samples[t] - mean) * (samples[t + lag] - mean);
    }
    acf[lag] = c / c0;
  }
  return acf;
}

std::vector<double> averaged_autocorrelation(
    const std::vector<std::vector<double>>& series, std::size_t max_lag) {
  if (series.empty()) {
    throw std::invalid_argument("no series to average");
  }
  std::vector<double> mean(max_lag + 1, 0.0);
  for (const auto& s : series) {
    const auto acf = autocorrelation(s, max_lag);
    for (std::size_t i = 0; i <= max_lag; ++i) mean[i] += acf[i];
  }
  for (auto& v : mean) v /= static_cast<double>(series.size());
  return mean;
}

}  // namespace bid
