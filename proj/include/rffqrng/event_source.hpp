#ifndef RFFQRNG_EVENT_SOURCE_HPP
#define RFFQRNG_EVENT_SOURCE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rffqrng/error.hpp"
#include "rffqrng/rng.hpp"

namespace rffqrng {

/// Photon detector: target (post-dead-time) detection rate, non-paralyzable dead time, seed.
struct DetectorConfig {
  double f_det = 45e6;          ///< mean detection rate, Hz
  double dead_time = 0.0;       ///< seconds
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;     ///< substream index within the seed

  void validate() const {
    if (!(f_det > 0.0) || !std::isfinite(f_det)) {
      throw Error(ErrorCode::InvalidConfig, "f_det must be positive, got " + std::to_string(f_det));
    }
    if (!(dead_time >= 0.0) || !std::isfinite(dead_time)) {
      throw Error(ErrorCode::InvalidConfig, "dead_time must be >= 0");
    }
    if (f_det * dead_time >= 1.0) {
      throw Error(ErrorCode::InvalidConfig,
                  "f_det * dead_time = " + std::to_string(f_det * dead_time) +
                      " >= 1, detection rate unreachable");
    }
  }
};

/// Strictly increasing detection timestamps in seconds; span is the time of the last detection.
struct DetectionTimes {
  std::vector<double> times;
  double span = 0.0;
  double dead_time = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
};

/// Pre-dead-time Poisson rate r with r / (1 + r * dead_time) == f_det.
inline double underlying_arrival_rate(const DetectorConfig& cfg) {
  cfg.validate();
  return cfg.f_det / (1.0 - cfg.f_det * cfg.dead_time);
}

/**
 * Incremental detection generator. Each gap is dead_time plus an exponential
 * waiting time at the underlying arrival rate; the detector is live at t = 0.
 */
class DetectionStream {
 public:
  explicit DetectionStream(const DetectorConfig& cfg)
      : rng_(Xoshiro256pp::substream(cfg.seed, cfg.stream)),
        rate_(underlying_arrival_rate(cfg)),
        dead_time_(cfg.dead_time) {}

  double next() noexcept {
    const double prev = t_;
    t_ += exponential(rng_, rate_);
    // gaps below the resolution of t would otherwise repeat a timestamp
    if (!(t_ > prev)) t_ = std::nextafter(prev, std::numeric_limits<double>::infinity());
    const double out = t_;
    t_ += dead_time_;
    return out;
  }

  [[nodiscard]] double rate() const noexcept { return rate_; }
  [[nodiscard]] double dead_time() const noexcept { return dead_time_; }

 private:
  Xoshiro256pp rng_;
  double rate_;
  double dead_time_;
  double t_ = 0.0;
};

inline DetectionTimes generate_detections(const DetectorConfig& cfg, std::size_t n_events) {
  cfg.validate();
  if (n_events < 1) throw Error(ErrorCode::InvalidInput, "n_events must be >= 1");
  DetectionStream stream(cfg);
  DetectionTimes out;
  out.dead_time = cfg.dead_time;
  out.times.reserve(n_events);
  for (std::size_t i = 0; i < n_events; ++i) out.times.push_back(stream.next());
  out.span = out.times.back();
  return out;
}

struct WaitingTimeHistogram {
  double bin_width = 0.0;
  std::vector<std::uint64_t> counts;   ///< counts[i] covers [i*w, (i+1)*w)
  std::optional<double> fitted_rate;   ///< slope of the exponential tail, 1/s
};

/**
 * Histogram of consecutive gaps with a weighted least-squares fit of
 * log(count) against bin centre. Bins overlapping the dead-time region are
 * excluded from the fit; so are bins with fewer than `min_fit_count` entries,
 * whose log is dominated by Poisson noise. With dead time the fitted slope is
 * the underlying arrival rate, not f_det.
 */
inline WaitingTimeHistogram waiting_time_histogram(const DetectionTimes& d, double bin_width,
                                                   std::uint64_t min_fit_count = 10) {
  if (d.size() < 2) throw Error(ErrorCode::TooFewEvents, "need at least two detections");
  if (!(bin_width > 0.0)) throw Error(ErrorCode::InvalidInput, "bin_width must be positive");

  WaitingTimeHistogram h;
  h.bin_width = bin_width;
  for (std::size_t i = 1; i < d.size(); ++i) {
    const auto bin = static_cast<std::size_t>((d.times[i] - d.times[i - 1]) / bin_width);
    if (bin >= h.counts.size()) h.counts.resize(bin + 1, 0);
    ++h.counts[bin];
  }

  const auto first_fit_bin = static_cast<std::size_t>(std::ceil(d.dead_time / bin_width));
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t used = 0;
  for (std::size_t i = first_fit_bin; i < h.counts.size(); ++i) {
    if (h.counts[i] < min_fit_count || h.counts[i] == 0) continue;
    const double w = static_cast<double>(h.counts[i]);
    const double x = (static_cast<double>(i) + 0.5) * bin_width;
    const double y = std::log(w);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
    ++used;
  }
  if (used >= 2) {
    const double denom = sw * sxx - sx * sx;
    if (denom > 0.0) h.fitted_rate = -(sw * sxy - sx * sy) / denom;
  }
  return h;
}

}  // namespace rffqrng

#endif  // RFFQRNG_EVENT_SOURCE_HPP
