#ifndef RFFQRNG_STS_SPECIAL_FUNCTIONS_HPP
#define RFFQRNG_STS_SPECIAL_FUNCTIONS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "rffqrng/error.hpp"

namespace rffqrng::sts {

/// Regularised upper incomplete gamma Q(a, x); the chi-square survival function is igamc(df/2, x/2).
inline double igamc(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (!std::isfinite(x)) return 0.0;
  return boost::math::gamma_q(a, x);
}

/// Kolmogorov survival function Q_KS(t) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2).
inline double kolmogorov_q(double t) {
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += sign * term;
    if (term < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;   ///< D_n
  double p_value = 1.0;
};

/**
 * One-sample Kolmogorov-Smirnov test against a continuous CDF, using the
 * asymptotic distribution with Stephens' finite-n correction.
 */
inline KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "KS test of nothing");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, hi - f, f - lo});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

inline KsResult ks_uniform(std::vector<double> samples) {
  return ks_test(std::move(samples), [](double x) { return std::clamp(x, 0.0, 1.0); });
}

}  // namespace rffqrng::sts

#endif  // RFFQRNG_STS_SPECIAL_FUNCTIONS_HPP
