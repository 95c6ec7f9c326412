#ifndef RFFQRNG_STS_CONSTANTS_HPP
#define RFFQRNG_STS_CONSTANTS_HPP

// Constants transcribed from NIST SP 800-22 rev1a, "A Statistical Test Suite
// for Random and Pseudorandom Number Generators for Cryptographic
// Applications" (April 2010), and the reference implementation sts-2.1.2.

#include <array>
#include <cstddef>
#include <string_view>

namespace rffqrng::sts::constants {

/// Significance level used for per-block pass/fail and proportion thresholds (section 4.2.1).
inline constexpr double kAlpha = 0.01;

/// Aggregate p-value of the uniformity check below which a test is flagged (section 4.2.2).
inline constexpr double kUniformityCutoff = 0.0001;

/// Bins for the uniformity chi-square over per-block p-values (section 4.2.2).
inline constexpr std::size_t kUniformityBins = 10;

/// Default block size of the battery, bits.
inline constexpr std::size_t kDefaultBlockSize = 1'000'000;

// Frequency (monobit), section 2.1.7: recommended n >= 100.
inline constexpr std::size_t kFrequencyMinLength = 100;

// Runs, section 2.3.7: n >= 100; prerequisite |pi - 1/2| < tau with tau = 2 / sqrt(n).
inline constexpr std::size_t kRunsMinLength = 100;
inline constexpr double kRunsTauNumerator = 2.0;

// Discrete Fourier Transform (spectral), sections 2.6.4 and 2.6.7: n >= 1000;
// peak threshold T = sqrt(ln(1/0.05) n), expected count under T is 0.95 n / 2,
// variance n * 0.95 * 0.05 / 4.
inline constexpr std::size_t kFftMinLength = 1000;
inline constexpr double kFftPeakFraction = 0.95;
inline constexpr double kFftVarianceDivisor = 4.0;

// Approximate Entropy, sections 2.12.4 and 2.12.7. The minimum length
// 2^(m+5) follows the project's precondition; NIST recommends m < log2(n) - 5.
inline constexpr unsigned kApEnMinM = 1;
inline constexpr unsigned kApEnMaxM = 16;
inline constexpr unsigned kApEnLengthExponentMargin = 5;

// Maurer's Universal Statistical test, section 2.9.7 and table in 2.9.
// Minimum block length for L = 6 .. 16 (index L - 6); Q = 10 * 2^L.
inline constexpr std::array<std::size_t, 11> kUniversalMinLength = {
    387'840,     904'960,     2'068'480,   4'654'080,   10'342'400,    22'753'280,
    49'643'520,  107'560'960, 231'669'760, 496'435'200, 1'059'061'760,
};
inline constexpr unsigned kUniversalMinL = 6;
inline constexpr unsigned kUniversalQFactor = 10;

// expectedValue(L) and variance(L) for L = 0 .. 16 (section 2.9.4, step 5).
inline constexpr std::array<double, 17> kUniversalExpected = {
    0, 0, 0, 0, 0, 0, 5.2177052, 6.1962507, 7.1836656, 8.1764248, 9.1723243,
    10.170032, 11.168765, 12.168070, 13.167693, 14.167488, 15.167379,
};
inline constexpr std::array<double, 17> kUniversalVariance = {
    0, 0, 0, 0, 0, 0, 2.954, 3.125, 3.238, 3.311, 3.356, 3.384, 3.401, 3.410, 3.416, 3.419, 3.421,
};

/// NIST STS tests this project does not implement; listed in battery reports.
inline constexpr std::array<std::string_view, 10> kUnimplementedTests = {
    "BlockFrequency",        "CumulativeSums",   "LongestRun",
    "Rank",                  "NonOverlappingTemplate", "OverlappingTemplate",
    "RandomExcursions",      "RandomExcursionsVariant", "Serial",
    "LinearComplexity",
};

}  // namespace rffqrng::sts::constants

#endif  // RFFQRNG_STS_CONSTANTS_HPP
