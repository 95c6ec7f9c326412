#ifndef RFFQRNG_STS_TESTS_HPP
#define RFFQRNG_STS_TESTS_HPP

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <new>
#include <numbers>
#include <string>
#include <vector>

#include <fftw3.h>

#include "rffqrng/bitstream.hpp"
#include "rffqrng/error.hpp"
#include "rffqrng/sts/constants.hpp"
#include "rffqrng/sts/special_functions.hpp"

namespace rffqrng::sts {

/// Minimum-length preconditions are enforced unless a test vector explicitly relaxes them.
struct TestOptions {
  bool enforce_min_length = true;

  static TestOptions relaxed_for_test_vectors() { return {false}; }
};

namespace detail {

inline void require_length(const BitStream& block, std::size_t min_len, const TestOptions& opt, const char* test) {
  if (opt.enforce_min_length && block.size() < min_len) {
    throw Error(ErrorCode::BlockTooShort, std::string(test) + " needs at least " + std::to_string(min_len) +
                                              " bits, got " + std::to_string(block.size()));
  }
  if (block.empty()) throw Error(ErrorCode::BlockTooShort, std::string(test) + " of an empty block");
}

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Monobit frequency test.
inline double frequency_test(const BitStream& block, const TestOptions& opt = {}) {
  detail::require_length(block, constants::kFrequencyMinLength, opt, "frequency test");
  const double n = static_cast<double>(block.size());
  const double s = 2.0 * static_cast<double>(block.count_ones()) - n;
  return std::erfc(std::abs(s) / std::sqrt(n) / std::numbers::sqrt2);
}

/// Runs test; throws PrerequisiteFailed when the frequency precheck rejects the block.
inline double runs_test(const BitStream& block, const TestOptions& opt = {}) {
  detail::require_length(block, constants::kRunsMinLength, opt, "runs test");
  const std::size_t n_sz = block.size();
  const double n = static_cast<double>(n_sz);
  const double pi = static_cast<double>(block.count_ones()) / n;
  if (std::abs(pi - 0.5) >= constants::kRunsTauNumerator / std::sqrt(n)) {
    throw Error(ErrorCode::PrerequisiteFailed, "runs test frequency prerequisite not met, pi = " + std::to_string(pi));
  }
  // V = 1 + number of positions where x_k != x_{k+1}.
  std::uint64_t changes = 0;
  const auto words = block.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t diff = words[w] ^ block.word_at(64 * w + 1);
    const std::size_t base = 64 * w;
    if (base + 64 > n_sz - 1) {
      const std::size_t valid = (n_sz - 1 > base) ? n_sz - 1 - base : 0;
      diff = valid == 0 ? 0 : diff & (~std::uint64_t{0} << (64 - valid));
    }
    changes += static_cast<std::uint64_t>(std::popcount(diff));
  }
  const double v = 1.0 + static_cast<double>(changes);
  const double pq = pi * (1.0 - pi);
  return std::erfc(std::abs(v - 2.0 * n * pq) / (2.0 * std::sqrt(2.0 * n) * pq));
}

/// Discrete Fourier transform (spectral) test.
inline double fft_test(const BitStream& block, const TestOptions& opt = {}) {
  detail::require_length(block, constants::kFftMinLength, opt, "FFT test");
  const std::size_t n = block.size();
  const std::size_t half = n / 2;

  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(half + 1);
  if (in == nullptr || out == nullptr) {
    fftw_free(in);
    fftw_free(out);
    throw std::bad_alloc();
  }
  for (std::size_t i = 0; i < n; ++i) in[i] = block.get(i) ? 1.0 : -1.0;
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  fftw_execute(plan);

  const double threshold = std::sqrt(std::log(1.0 / 0.05) * static_cast<double>(n));
  std::size_t below = 0;
  for (std::size_t j = 0; j < half; ++j) {
    if (std::hypot(out[j][0], out[j][1]) < threshold) ++below;
  }
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);

  const double nd = static_cast<double>(n);
  const double expected = constants::kFftPeakFraction * nd / 2.0;
  const double d = (static_cast<double>(below) - expected) /
                   std::sqrt(nd * constants::kFftPeakFraction * (1.0 - constants::kFftPeakFraction) /
                             constants::kFftVarianceDivisor);
  return std::erfc(std::abs(d) / std::numbers::sqrt2);
}

namespace detail {

/// phi(m) = sum over cyclic m-gram frequencies of p ln p, for a block already padded with its first bits.
inline double apen_phi(const BitStream& padded, std::size_t n, unsigned m) {
  std::vector<std::uint32_t> counts(std::size_t{1} << m, 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[padded.word_at(i) >> (64 - m)];
  const double nd = static_cast<double>(n);
  double phi = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / nd;
    phi += p * std::log(p);
  }
  return phi;
}

}  // namespace detail

/// Approximate entropy test with cyclic m- and (m+1)-gram counting; chi-square with 2^m dof.
inline double approximate_entropy_test(const BitStream& block, unsigned m, const TestOptions& opt = {}) {
  if (m < constants::kApEnMinM || m > constants::kApEnMaxM) {
    throw Error(ErrorCode::InvalidBlockLength, "ApEn block length m must be in [1, 16], got " + std::to_string(m));
  }
  const std::size_t n = block.size();
  const std::size_t min_len = std::size_t{1} << (m + constants::kApEnLengthExponentMargin);
  if ((opt.enforce_min_length && n < min_len) || n < m + 1) {
    throw Error(ErrorCode::InvalidBlockLength,
                "ApEn with m=" + std::to_string(m) + " needs at least " + std::to_string(min_len) + " bits");
  }
  BitStream padded(n + m);
  {
    auto pw = padded.mutable_words();
    for (std::size_t w = 0; w < block.words().size(); ++w) pw[w] = block.words()[w];
    for (unsigned j = 0; j < m; ++j) padded.set(n + j, block.get(j % n));
  }
  const double phi_m = detail::apen_phi(padded, n, m);
  const double phi_m1 = detail::apen_phi(padded, n, m + 1);
  const double apen = phi_m - phi_m1;
  const double chi2 = 2.0 * static_cast<double>(n) * (std::numbers::ln2 - apen);
  return igamc(std::ldexp(1.0, static_cast<int>(m) - 1), chi2 / 2.0);
}

struct UniversalParameters {
  unsigned L = 0;
  std::size_t Q = 0;
  std::size_t K = 0;
};

/// Block length L and initialisation size Q from the NIST length table.
inline UniversalParameters universal_parameters(std::size_t n) {
  unsigned L = 0;
  for (std::size_t i = 0; i < constants::kUniversalMinLength.size(); ++i) {
    if (n >= constants::kUniversalMinLength[i]) L = constants::kUniversalMinL + static_cast<unsigned>(i);
  }
  if (L == 0) {
    throw Error(ErrorCode::BlockTooShort, "universal test needs at least " +
                                              std::to_string(constants::kUniversalMinLength[0]) + " bits, got " +
                                              std::to_string(n));
  }
  const std::size_t Q = constants::kUniversalQFactor * (std::size_t{1} << L);
  return {L, Q, n / L - Q};
}

/// Maurer's universal statistical test.
inline double universal_test(const BitStream& block) {
  const auto [L, Q, K] = universal_parameters(block.size());
  std::vector<std::size_t> last_seen(std::size_t{1} << L, 0);
  auto pattern = [&](std::size_t i) { return block.word_at(i * L) >> (64 - L); };
  for (std::size_t i = 1; i <= Q; ++i) last_seen[pattern(i - 1)] = i;
  double sum = 0.0;
  for (std::size_t i = Q + 1; i <= Q + K; ++i) {
    const auto p = pattern(i - 1);
    sum += std::log2(static_cast<double>(i - last_seen[p]));
    last_seen[p] = i;
  }
  const double k = static_cast<double>(K);
  const double l = static_cast<double>(L);
  const double phi = sum / k;
  const double c = 0.7 - 0.8 / l + (4.0 + 32.0 / l) * std::pow(k, -3.0 / l) / 15.0;
  const double sigma = c * std::sqrt(constants::kUniversalVariance[L] / k);
  return std::erfc(std::abs(phi - constants::kUniversalExpected[L]) / (std::numbers::sqrt2 * sigma));
}

}  // namespace rffqrng::sts

#endif  // RFFQRNG_STS_TESTS_HPP
