#ifndef RFFQRNG_STS_BATTERY_HPP
#define RFFQRNG_STS_BATTERY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rffqrng/bitstream.hpp"
#include "rffqrng/error.hpp"
#include "rffqrng/parallel.hpp"
#include "rffqrng/sts/constants.hpp"
#include "rffqrng/sts/special_functions.hpp"
#include "rffqrng/sts/tests.hpp"

namespace rffqrng::sts {

struct Proportion {
  std::size_t passed = 0;
  std::size_t total = 0;
  std::size_t threshold = 0;

  [[nodiscard]] bool ok() const noexcept { return passed >= threshold; }
};

struct TestReport {
  std::string test_name;
  std::size_t block_size = 0;
  std::vector<double> p_values;          ///< one per block, in block order
  std::optional<double> uniformity_p;    ///< absent with fewer than 10 blocks
  Proportion proportion;

  /// Proportion at or above threshold and, when available, uniformity at or above 1e-4.
  [[nodiscard]] bool passed() const noexcept {
    return proportion.ok() && (!uniformity_p || *uniformity_p >= constants::kUniformityCutoff);
  }
};

struct CdfPoint {
  double rank_fraction = 0.0;   ///< i / m for the i-th smallest value, i = 1..m
  double p_value = 0.0;
};

using PValueCdf = std::vector<CdfPoint>;

inline PValueCdf pvalue_cdf(std::vector<double> p) {
  if (p.empty()) throw Error(ErrorCode::EmptyInput, "no p-values");
  std::sort(p.begin(), p.end());
  PValueCdf out;
  out.reserve(p.size());
  const double m = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out.push_back({static_cast<double>(i + 1) / m, p[i]});
  return out;
}

/**
 * Minimum passing count for m samples at significance alpha:
 * m * (p - 3 sqrt(p (1 - p) / m)) with p = 1 - alpha, truncated to an integer
 * the way the NIST assessment report prints it (980 for m = 1000).
 */
inline std::size_t proportion_threshold(std::size_t m, double alpha = constants::kAlpha) {
  const double md = static_cast<double>(m);
  const double p_hat = 1.0 - alpha;
  const double t = md * (p_hat - 3.0 * std::sqrt(p_hat * alpha / md));
  return t <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(t));
}

/// Chi-square over 10 equal-width bins of [0, 1], p-value igamc(9/2, chi2/2).
inline double uniformity_p_value(const std::vector<double>& p) {
  if (p.size() < constants::kUniformityBins) {
    throw Error(ErrorCode::TooFewSamples, "uniformity needs at least 10 p-values");
  }
  std::array<std::size_t, constants::kUniformityBins> bins{};
  for (double v : p) {
    auto idx = static_cast<std::size_t>(v * static_cast<double>(constants::kUniformityBins));
    bins[std::min(idx, constants::kUniformityBins - 1)]++;
  }
  const double expected = static_cast<double>(p.size()) / static_cast<double>(constants::kUniformityBins);
  double chi2 = 0.0;
  for (auto b : bins) chi2 += (static_cast<double>(b) - expected) * (static_cast<double>(b) - expected) / expected;
  return igamc(static_cast<double>(constants::kUniformityBins - 1) / 2.0, chi2 / 2.0);
}

struct UniformityProportion {
  double uniformity_p = 0.0;
  std::size_t passed = 0;
  std::size_t threshold = 0;
};

inline UniformityProportion uniformity_and_proportion(const std::vector<double>& p,
                                                      double alpha = constants::kAlpha) {
  const double u = uniformity_p_value(p);
  const auto passed = static_cast<std::size_t>(std::count_if(p.begin(), p.end(), [&](double v) { return v >= alpha; }));
  return {u, passed, proportion_threshold(p.size(), alpha)};
}

enum class TestKind { Frequency, ApproximateEntropy, Fft, Universal, Runs };

struct BatteryOptions {
  std::size_t block_size = constants::kDefaultBlockSize;
  std::vector<TestKind> tests = {TestKind::Frequency, TestKind::ApproximateEntropy, TestKind::Fft,
                                 TestKind::Universal, TestKind::Runs};
  std::vector<unsigned> apen_m = {3, 10};   ///< one ApEn report per value
  unsigned jobs = 1;
  double alpha = constants::kAlpha;
};

inline std::string test_name(TestKind kind, unsigned m = 0) {
  switch (kind) {
    case TestKind::Frequency: return "Frequency";
    case TestKind::ApproximateEntropy: return "ApproximateEntropy(m=" + std::to_string(m) + ")";
    case TestKind::Fft: return "FFT";
    case TestKind::Universal: return "Universal";
    case TestKind::Runs: return "Runs";
  }
  return "Unknown";
}

/// Summary of a list of per-block p-values.
inline TestReport summarize(std::string name, std::size_t block_size, std::vector<double> p_values,
                            double alpha = constants::kAlpha) {
  TestReport r;
  r.test_name = std::move(name);
  r.block_size = block_size;
  r.p_values = std::move(p_values);
  r.proportion.total = r.p_values.size();
  r.proportion.passed = static_cast<std::size_t>(
      std::count_if(r.p_values.begin(), r.p_values.end(), [&](double v) { return v >= alpha; }));
  r.proportion.threshold = proportion_threshold(r.proportion.total, alpha);
  if (r.p_values.size() >= constants::kUniformityBins) r.uniformity_p = uniformity_p_value(r.p_values);
  return r;
}

/// One block's p-value; a failed runs-test prerequisite scores 0.
inline double block_p_value(const BitStream& block, TestKind kind, unsigned m = 0) {
  switch (kind) {
    case TestKind::Frequency: return frequency_test(block);
    case TestKind::ApproximateEntropy: return approximate_entropy_test(block, m);
    case TestKind::Fft: return fft_test(block);
    case TestKind::Universal: return universal_test(block);
    case TestKind::Runs:
      try {
        return runs_test(block);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::PrerequisiteFailed) return 0.0;
        throw;
      }
  }
  return 0.0;
}

/// Splits x into complete non-overlapping blocks (any remainder is ignored) and runs each selected test.
inline std::vector<TestReport> run_battery(const BitStream& x, const BatteryOptions& opt = {}) {
  if (opt.block_size == 0) throw Error(ErrorCode::InvalidInput, "block size must be positive");
  const std::size_t n_blocks = x.size() / opt.block_size;
  if (n_blocks == 0) {
    throw Error(ErrorCode::NoCompleteBlock, "stream of " + std::to_string(x.size()) + " bits has no complete block of " +
                                                std::to_string(opt.block_size));
  }

  struct Job {
    TestKind kind;
    unsigned m;
  };
  std::vector<Job> jobs;
  for (auto kind : opt.tests) {
    if (kind == TestKind::ApproximateEntropy) {
      for (auto m : opt.apen_m) jobs.push_back({kind, m});
    } else {
      jobs.push_back({kind, 0});
    }
  }

  std::vector<std::vector<double>> p(jobs.size(), std::vector<double>(n_blocks));
  parallel_for(n_blocks, opt.jobs, [&](std::size_t b) {
    const BitStream block = x.slice(b * opt.block_size, opt.block_size);
    for (std::size_t j = 0; j < jobs.size(); ++j) p[j][b] = block_p_value(block, jobs[j].kind, jobs[j].m);
  });

  std::vector<TestReport> out;
  out.reserve(jobs.size());
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    out.push_back(summarize(test_name(jobs[j].kind, jobs[j].m), opt.block_size, std::move(p[j]), opt.alpha));
  }
  return out;
}

inline std::vector<std::string> unimplemented_tests() {
  return {constants::kUnimplementedTests.begin(), constants::kUnimplementedTests.end()};
}

}  // namespace rffqrng::sts

#endif  // RFFQRNG_STS_BATTERY_HPP
