#ifndef RFFQRNG_STATS_HPP
#define RFFQRNG_STATS_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rffqrng/bitstream.hpp"
#include "rffqrng/error.hpp"

namespace rffqrng::stats {

/// Bias b = p1 - 1/2 with its binomial variance 1/(4n); stderr is 1/(2 sqrt(n)).
struct BiasEstimate {
  double value = 0.0;
  std::size_t n = 0;
  double variance = 0.0;

  [[nodiscard]] double standard_error() const noexcept { return std::sqrt(variance); }
};

struct AutocorrEstimate {
  std::size_t lag = 0;
  double value = 0.0;
  std::size_t n = 0;
  double variance = 0.0;   ///< 1 / (n - k - 1)

  [[nodiscard]] double standard_error() const noexcept { return std::sqrt(variance); }
};

inline BiasEstimate bias(const BitStream& x) {
  if (x.empty()) throw Error(ErrorCode::EmptyStream, "bias of an empty stream");
  const auto n = x.size();
  // ones/n - 1/2 evaluated as (2*ones - n) / (2n) keeps the result exact for balanced streams.
  const double ones = static_cast<double>(x.count_ones());
  const double nd = static_cast<double>(n);
  return {(2.0 * ones - nd) / (2.0 * nd), n, 1.0 / (4.0 * nd)};
}

namespace detail {

/// Sum over i < n - k of x_i * x_{i+k}.
inline std::uint64_t lagged_coincidences(const BitStream& x, std::size_t k) {
  const auto words = x.words();
  std::uint64_t c = 0;
  for (std::size_t w = 0; w < words.size(); ++w) {
    c += static_cast<std::uint64_t>(std::popcount(words[w] & x.word_at(64 * w + k)));
  }
  return c;
}

/**
 * Lag-k serial correlation with both sums over i = 1..n-k and the full-stream
 * mean, evaluated exactly in scaled 128-bit integers. Pathologically short
 * streams can push the ratio outside [-1, 1]; the result is clamped there.
 */
inline double autocorr_value(std::size_t n_sz, std::size_t k, std::uint64_t ones, std::uint64_t head_ones,
                             std::uint64_t tail_ones, std::uint64_t coincidences) {
  using i128 = __int128;
  const i128 n = static_cast<i128>(n_sz);
  const i128 t = ones;
  const i128 a = head_ones;   // ones in [0, n-k)
  const i128 b = tail_ones;   // ones in [k, n)
  const i128 m = n - static_cast<i128>(k);
  const i128 num = static_cast<i128>(coincidences) * n * n - t * n * (a + b) + m * t * t;
  const i128 den = a * n * n - 2 * t * n * a + m * t * t;
  if (den == 0) throw Error(ErrorCode::ConstantStream, "autocorrelation of a constant stream");
  const long double r = static_cast<long double>(num) / static_cast<long double>(den);
  return static_cast<double>(std::clamp<long double>(r, -1.0L, 1.0L));
}

inline void check_lag(const BitStream& x, std::size_t k) {
  if (k + 1 >= x.size()) {
    throw Error(ErrorCode::LagTooLarge,
                "lag " + std::to_string(k) + " needs more than " + std::to_string(k + 1) + " bits");
  }
}

}  // namespace detail

inline AutocorrEstimate autocorr(const BitStream& x, std::size_t k) {
  detail::check_lag(x, k);
  const auto n = x.size();
  const double value = detail::autocorr_value(n, k, x.count_ones(), x.count_ones(0, n - k), x.count_ones(k, n),
                                              detail::lagged_coincidences(x, k));
  return {k, value, n, 1.0 / static_cast<double>(n - k - 1)};
}

/// a_1 .. a_kmax from one sweep over the packed words.
inline std::vector<AutocorrEstimate> autocorr_profile(const BitStream& x, std::size_t k_max) {
  if (k_max == 0) throw Error(ErrorCode::InvalidInput, "k_max must be >= 1");
  detail::check_lag(x, k_max);
  const auto n = x.size();
  const auto words = x.words();
  std::vector<std::uint64_t> coincidences(k_max + 1, 0);
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (std::size_t k = 1; k <= k_max; ++k) {
      coincidences[k] += static_cast<std::uint64_t>(std::popcount(words[w] & x.word_at(64 * w + k)));
    }
  }
  const auto ones = x.count_ones();
  std::vector<AutocorrEstimate> out;
  out.reserve(k_max);
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double v =
        detail::autocorr_value(n, k, ones, x.count_ones(0, n - k), x.count_ones(k, n), coincidences[k]);
    out.push_back({k, v, n, 1.0 / static_cast<double>(n - k - 1)});
  }
  return out;
}

/// Counts of all n - L + 1 overlapping L-bit windows, indexed by the window read MSB-first.
inline std::vector<std::uint64_t> ngram_counts(const BitStream& x, unsigned L) {
  if (L < 1 || L > 24) throw Error(ErrorCode::InvalidBlockLength, "L must be in [1, 24]");
  if (x.size() < L) throw Error(ErrorCode::InvalidBlockLength, "stream shorter than L");
  std::vector<std::uint64_t> counts(std::size_t{1} << L, 0);
  const std::size_t windows = x.size() - L + 1;
  for (std::size_t i = 0; i < windows; ++i) ++counts[x.word_at(i) >> (64 - L)];
  return counts;
}

/// Shannon entropy (bits) of the empirical overlapping L-gram distribution; at most L.
inline double ngram_entropy(const BitStream& x, unsigned L) {
  const auto counts = ngram_counts(x, L);
  const double total = static_cast<double>(x.size() - L + 1);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return std::max(h, 0.0);
}

/// Median of a sample; the mean of the two middle values for even sizes.
inline double median(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorCode::EmptyInput, "median of nothing");
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace rffqrng::stats

#endif  // RFFQRNG_STATS_HPP
