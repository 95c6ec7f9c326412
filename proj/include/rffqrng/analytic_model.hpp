#ifndef RFFQRNG_ANALYTIC_MODEL_HPP
#define RFFQRNG_ANALYTIC_MODEL_HPP

// Closed-form predictions for the sampled toggle flip-flop, used as oracles
// against Monte Carlo output.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "rffqrng/error.hpp"
#include "rffqrng/rff_core.hpp"

namespace rffqrng::analytic {

struct OperatingPoint {
  double f_det = 0.0;
  double f_bit = 0.0;
  double lambda = 0.0;   ///< mean detections per bit, f_det / f_bit

  static OperatingPoint make(double f_det, double f_bit) {
    if (!(f_det > 0.0) || !(f_bit > 0.0)) throw Error(ErrorCode::InvalidInput, "rates must be positive");
    return {f_det, f_bit, f_det / f_bit};
  }
};

/// Mean HIGH/LOW times seen by the D input over two consecutive mean detection periods.
struct DwellTimes {
  double t_high = 0.0;   ///< T1
  double t_low = 0.0;    ///< T0
  double t_h = 0.0;      ///< flat HIGH part of the TFF output
  double t_l = 0.0;      ///< flat LOW part of the TFF output
  double t_det = 0.0;
};

inline DwellTimes dwell_times(const AnalogTimingModel& a, double t_det) {
  a.validate();
  if (!(t_det > a.t_rise) || !(t_det > a.t_fall)) {
    throw Error(ErrorCode::InvalidInput, "transitions must be shorter than the detection period");
  }
  DwellTimes d;
  d.t_det = t_det;
  d.t_h = t_det - a.t_rise;
  d.t_l = t_det - a.t_fall;
  d.t_high = (1.0 - a.eta) * (a.t_rise + a.t_fall) + d.t_h;
  d.t_low = a.eta * (a.t_rise + a.t_fall) + d.t_l;
  return d;
}

/// alpha = (t_F - eta (t_R + t_F)) / 2, bias per unit detection rate (seconds).
inline double bias_coefficient(const AnalogTimingModel& a) {
  return (a.t_fall - a.eta * (a.t_rise + a.t_fall)) / 2.0;
}

inline double predicted_bias(const AnalogTimingModel& a, double f_det) {
  if (!(f_det >= 0.0)) throw Error(ErrorCode::InvalidInput, "f_det must be >= 0");
  return bias_coefficient(a) * f_det;
}

/// Threshold at which bias vanishes for every detection rate.
inline double zero_bias_eta(double t_rise, double t_fall) {
  if (!(t_fall > 0.0) || !(t_rise >= 0.0)) {
    throw Error(ErrorCode::InvalidInput, "need t_fall > 0 and t_rise >= 0");
  }
  return 1.0 / (1.0 + t_rise / t_fall);
}

/// Poisson probability of k events at mean lambda, evaluated in log space.
inline double poisson_pmf(unsigned long long k, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidInput, "lambda must be >= 0");
  if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(-lambda + kd * std::log(lambda) - std::lgamma(kd + 1.0));
}

/// Probability that the next bit repeats the current one: even number of toggles in a period.
inline double same_bit_prob_s1(double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidInput, "lambda must be >= 0");
  return 0.5 + 0.5 * std::exp(-2.0 * lambda);
}

/// Lag-1 autocorrelation of the ideal (zero dead time) process.
inline double a1_ideal(double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidInput, "lambda must be >= 0");
  return std::exp(-2.0 * lambda);
}

/// a_k = 2 s_k - 1.
inline double autocorr_from_same_prob(double s) { return 2.0 * s - 1.0; }

struct BiasAutocorr {
  double bias = 0.0;
  double a1 = 0.0;
};

/// XOR of two independent strings each with bias b and lag-1 autocorrelation a1.
inline BiasAutocorr xor_propagation(double b, double a1) {
  if (!(std::abs(b) <= 0.5) || !(std::abs(a1) <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "need |b| <= 1/2 and |a1| <= 1");
  }
  return {-2.0 * b * b, a1 * a1 + 8.0 * a1 * b * b};
}

/**
 * XOR of two independent strings with different statistics, to the same order
 * as xor_propagation: b' = -2 b_x b_y, a' = a_x a_y + 4 (a_x b_y^2 + a_y b_x^2).
 * Reduces to xor_propagation when both inputs are equal.
 */
inline BiasAutocorr xor_combine(const BiasAutocorr& x, const BiasAutocorr& y) {
  return {-2.0 * x.bias * y.bias, x.a1 * y.a1 + 4.0 * (x.a1 * y.bias * y.bias + y.a1 * x.bias * x.bias)};
}

/// Predicted (b, a1) after 1 .. n_stages stages, each new stage XORed onto the running result.
inline std::vector<BiasAutocorr> xor_chain(const BiasAutocorr& single, std::size_t n_stages) {
  std::vector<BiasAutocorr> out;
  if (n_stages == 0) return out;
  out.push_back(single);
  for (std::size_t i = 1; i < n_stages; ++i) out.push_back(xor_combine(out.back(), single));
  return out;
}

}  // namespace rffqrng::analytic

#endif  // RFFQRNG_ANALYTIC_MODEL_HPP
