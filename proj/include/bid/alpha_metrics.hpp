#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bid/id_core.hpp"

namespace bid {

struct PriceSeries {
  std::vector<std::string> dates;
  std::vector<double> closes;
};

// Throws unless dates are strictly ascending, closes are positive and the
// two vectors have equal length.
void validate(const PriceSeries& p);

struct ReturnSeries {
  std::vector<std::string> dates;
  std::vector<double> values;
};

// Denominator choice for a one-day return: the close it ends on or the close
// it starts from.
enum class ReturnConvention { kCurrentClose, kPreviousClose };

ReturnSeries returns(const PriceSeries& prices, ReturnConvention convention);

// shifted[i] = ret[i + h], the return realized h steps after slot i.
std::vector<double> shifted_return(const std::vector<double>& ret, int h);

// Average ranks, 1-based; ties share the mean of their positions.
std::vector<double> fractional_ranks(const std::vector<double>& values);

// Pearson correlation. A constant input has no correlation; the result is
// 0 with *degenerate set.
double pearson(const std::vector<double>& x, const std::vector<double>& y,
               bool* degenerate = nullptr);

double spearman(const std::vector<double>& x, const std::vector<double>& y,
                bool* degenerate = nullptr);

// Rank correlation between a signal and the return h steps ahead; signal and
// ret must be aligned on the same dates.
double rank_ic(const std::vector<double>& signal, const std::vector<double>& ret,
               int h, bool* degenerate = nullptr);

struct CorrelationSummary {
  double mean_abs = 0.0;
  std::size_t degenerate_pairs = 0;
};

// Mean absolute Pearson correlation over unordered row pairs.
CorrelationSummary mean_pairwise_correlation(const Matrix& rows);

}  // namespace bid
