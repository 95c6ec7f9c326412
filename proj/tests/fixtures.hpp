#ifndef RFFQRNG_TESTS_FIXTURES_HPP
#define RFFQRNG_TESTS_FIXTURES_HPP

#include "rffqrng/analytic_model.hpp"
#include "rffqrng/rff_core.hpp"

namespace rffqrng::testutil {

/// eta = 0.5, t_R = 500 ps, t_F = 527.2 ps: bias coefficient alpha = 6.8 ps.
inline AnalogTimingModel paper_analog() { return {0.5, 500e-12, 527.2e-12}; }

inline constexpr double kPaperDeadTime = 6e-9;

/**
 * A deliberately poor stage: b = 0.05 from a detuned threshold and a1 ~ 0.1
 * at f_bit = 20 MHz. The crossing offsets end up 2 alpha = 5.6 ns apart, so a
 * 6 ns dead time keeps crossings ordered; that dead time pulls a1 well below
 * exp(-2 lambda), hence lambda = 0.9 rather than 1.151.
 */
struct DetunedStage {
  static constexpr double kTargetBias = 0.05;
  static constexpr double kLambda = 0.9;
  static constexpr double kFBit = 20e6;
  static constexpr double kFDet = kLambda * kFBit;
  static constexpr double kTransition = 10e-9;
  static constexpr double kDeadTime = 6e-9;

  static AnalogTimingModel analog() {
    const double alpha = kTargetBias / kFDet;
    const double eta = (kTransition - 2.0 * alpha) / (2.0 * kTransition);
    return {eta, kTransition, kTransition};
  }

  static QrngConfig config(std::size_t n_stages, std::uint64_t seed, std::size_t n_bits) {
    return QrngConfig::uniform(n_stages, kFDet, kDeadTime, seed, analog(), {kFBit, std::nullopt}, n_bits);
  }
};

}  // namespace rffqrng::testutil

#endif  // RFFQRNG_TESTS_FIXTURES_HPP
