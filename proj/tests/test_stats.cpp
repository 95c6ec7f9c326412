#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "fixtures.hpp"
#include "rffqrng/rff_core.hpp"
#include "rffqrng/stats.hpp"
#include "rffqrng/sts/special_functions.hpp"
#include "test_support.hpp"

using namespace rffqrng;
using namespace rffqrng::stats;

namespace {

BitStream alternating(std::size_t n) {
  std::string s(n, '0');
  for (std::size_t i = 1; i < n; i += 2) s[i] = '1';
  return BitStream::from_string(s);
}

BitStream constant(std::size_t n, bool v) {
  BitStream b(n);
  return v ? b.complement() : b;
}

/// p-value of Pearson's chi-square on the overlapping L-gram counts against the uniform distribution.
double ngram_chi2_p(const BitStream& x, unsigned L) {
  const auto counts = ngram_counts(x, L);
  const double total = static_cast<double>(x.size() - L + 1);
  const double expected = total / static_cast<double>(counts.size());
  double chi2 = 0;
  for (auto c : counts) chi2 += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  return sts::igamc((static_cast<double>(counts.size()) - 1.0) / 2.0, chi2 / 2.0);
}

}  // namespace

TEST(Bias, Examples) {
  EXPECT_EQ(bias(constant(1000, true)).value, 0.5);
  EXPECT_EQ(bias(constant(1000, false)).value, -0.5);
  EXPECT_EQ(bias(alternating(1000)).value, 0.0);
  const auto e = bias(alternating(1000));
  EXPECT_DOUBLE_EQ(e.variance, 1.0 / 4000.0);
  EXPECT_DOUBLE_EQ(e.standard_error(), 1.0 / (2.0 * std::sqrt(1000.0)));
  EXPECT_EQ(e.n, 1000U);
  try {
    bias(BitStream{});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::EmptyStream);
  }
}

TEST(Bias, SimulatedSingleStageMatchesPrediction) {
  constexpr std::size_t n = 100'000'000;
  const auto cfg = QrngConfig::uniform(1, 45e6, testutil::kPaperDeadTime, 2024, testutil::paper_analog(),
                                       {20e6, std::nullopt}, n);
  const auto b = bias(simulate_qrng(cfg));
  EXPECT_NEAR(b.value, 3.06e-4, 4.0 * b.standard_error());
}

TEST(Autocorr, Examples) {
  const auto a = autocorr(alternating(1000), 1);
  EXPECT_EQ(a.value, -1.0);
  EXPECT_EQ(a.lag, 1U);
  EXPECT_DOUBLE_EQ(a.variance, 1.0 / 998.0);
  EXPECT_EQ(autocorr(alternating(1000), 2).value, 1.0);
  try {
    autocorr(constant(100, false), 1);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::ConstantStream);
  }
  try {
    autocorr(alternating(10), 9);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::LagTooLarge);
  }
}

TEST(Autocorr, IdealStageAtUnitRate) {
  constexpr std::size_t n = 10'000'000;
  const auto cfg = QrngConfig::uniform(1, 20e6, 0.0, 404, AnalogTimingModel::ideal(), {20e6, std::nullopt}, n);
  EXPECT_NEAR(autocorr(simulate_qrng(cfg), 1).value, std::exp(-2.0), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Autocorr, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const std::size_t n = 3 + seed * 29;
    const auto x = seed % 3 == 0 ? testutil::markov_stream(n, 0.4, seed) : testutil::iid_stream(n, 0.3, seed);
    if (x.count_ones() == 0 || x.count_ones() == n) continue;
    const auto ints = testutil::to_ints(x);
    for (std::size_t k = 1; k < std::min<std::size_t>(n - 1, 70); ++k) {
      const long double oracle = testutil::oracle_autocorr(ints, k);
      const double got = autocorr(x, k).value;
      EXPECT_NEAR(got, std::clamp<double>(static_cast<double>(oracle), -1.0, 1.0), 1e-12) << "n=" << n << " k=" << k;
      EXPECT_GE(got, -1.0);
      EXPECT_LE(got, 1.0);
    }
  }
}

TEST(Autocorr, ComplementInvariance) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto x = testutil::markov_stream(10'000 + seed, 0.2, seed);
    const auto y = x.complement();
    EXPECT_EQ(bias(y).value, -bias(x).value);
    for (std::size_t k = 1; k <= 5; ++k) EXPECT_EQ(autocorr(x, k).value, autocorr(y, k).value);
  }
}

TEST(Autocorr, SameBitFractionWithinOrderOneOverN) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t n = 5000 * seed;
    const auto x = testutil::iid_stream(n, 0.5 + 0.02 * static_cast<double>(seed), seed);
    for (std::size_t k = 1; k <= 4; ++k) {
      std::size_t same = 0;
      for (std::size_t i = 0; i + k < n; ++i) same += x.get(i) == x.get(i + k) ? 1 : 0;
      const double s = static_cast<double>(same) / static_cast<double>(n - k);
      const double a = autocorr(x, k).value;
      // Exact identity for a balanced stream; the bias term 4b^2(1-a) and edge effects are O(b^2) + O(k/N).
      const double b = bias(x).value;
      EXPECT_NEAR(0.5 + a / 2.0 + 2.0 * b * b * (1.0 - a), s, 20.0 / static_cast<double>(n)) << n << " " << k;
    }
  }
}

TEST(AutocorrProfile, MatchesPerLagCalls) {
  const auto x = testutil::markov_stream(100'003, 0.3, 77);
  const auto p = autocorr_profile(x, 6);
  ASSERT_EQ(p.size(), 6U);
  for (std::size_t k = 1; k <= 6; ++k) {
    EXPECT_EQ(p[k - 1].lag, k);
    EXPECT_EQ(p[k - 1].value, autocorr(x, k).value);
  }
}

TEST(AutocorrProfile, IdealStreamAtLambdaThree) {
  constexpr std::size_t n = 10'000'000;
  const auto cfg = QrngConfig::uniform(1, 30e6, 0.0, 808, AnalogTimingModel::ideal(), {10e6, std::nullopt}, n);
  const auto p = autocorr_profile(simulate_qrng(cfg), 4);
  const double tol = 4.0 / std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(p[0].value, std::exp(-6.0), tol);
  for (std::size_t k = 2; k <= 4; ++k) EXPECT_NEAR(p[k - 1].value, 0.0, tol) << k;
}

TEST(AutocorrProfile, Errors) {
  EXPECT_THROW(autocorr_profile(alternating(10), 9), Error);
  EXPECT_THROW(autocorr_profile(constant(100, true), 3), Error);
  EXPECT_THROW(autocorr_profile(alternating(10), 0), Error);
}

TEST(NgramEntropy, Examples) {
  for (unsigned L : {1U, 3U, 8U}) EXPECT_EQ(ngram_entropy(constant(1000, false), L), 0.0);
  EXPECT_NEAR(ngram_entropy(testutil::prng_stream(10'000'000, 3), 3), 3.0, 1e-4);
  const double h = ngram_entropy(testutil::iid_stream(10'000'000, 0.6, 4), 1);
  EXPECT_NEAR(h, 0.9709505944546686, 1e-4);
  EXPECT_NEAR(ngram_entropy(alternating(1000), 1), 1.0, 1e-12);
  // overlapping pairs: 500 of "01", 499 of "10"
  const double p01 = 500.0 / 999.0, p10 = 499.0 / 999.0;
  EXPECT_NEAR(ngram_entropy(alternating(1000), 2), -(p01 * std::log2(p01) + p10 * std::log2(p10)), 1e-12);
}

TEST(NgramEntropy, Errors) {
  EXPECT_THROW(ngram_entropy(alternating(10), 0), Error);
  EXPECT_THROW(ngram_entropy(alternating(100), 25), Error);
  EXPECT_THROW(ngram_entropy(alternating(4), 5), Error);
}

TEST(NgramEntropy, CountsMatchStringEnumeration) {
  const auto x = testutil::prng_stream(2000, 9);
  const std::string s = x.to_string();
  for (unsigned L : {1U, 4U, 11U}) {
    const auto counts = ngram_counts(x, L);
    std::vector<std::uint64_t> ref(counts.size(), 0);
    for (std::size_t i = 0; i + L <= s.size(); ++i) ++ref[std::stoul(s.substr(i, L), nullptr, 2)];
    EXPECT_EQ(counts, ref);
  }
}

TEST(NgramEntropy, MaximalExactlyWhenChiSquarePasses) {
  // H is maximal within tolerance when the L-gram deficit L - H stays below the
  // chi-square critical value at 0.01 converted to bits: chi2 / (2 N ln 2).
  constexpr std::size_t n = 1'000'000;
  constexpr unsigned L = 3;
  const double chi2_crit = 18.475;   // 7 degrees of freedom, upper 1%
  const double tol = chi2_crit / (2.0 * static_cast<double>(n) * std::log(2.0));
  int checked_pass = 0, checked_fail = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const BitStream streams[] = {testutil::prng_stream(n, seed), testutil::iid_stream(n, 0.505, seed),
                                 testutil::markov_stream(n, 0.02, seed)};
    for (const auto& x : streams) {
      const double h = ngram_entropy(x, L);
      const double p = ngram_chi2_p(x, L);
      // skip the thin band where the two approximations can disagree
      if (std::abs(p - 0.01) < 0.005) continue;
      EXPECT_EQ(h >= L - tol, p >= 0.01) << "seed " << seed << " H=" << h << " p=" << p;
      (p >= 0.01 ? checked_pass : checked_fail)++;
    }
  }
  EXPECT_GE(checked_pass, 5);
  EXPECT_GE(checked_fail, 15);
}

TEST(Median, OddEvenAndEmpty) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_THROW(median({}), Error);
}
