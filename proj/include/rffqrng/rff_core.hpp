#ifndef RFFQRNG_RFF_CORE_HPP
#define RFFQRNG_RFF_CORE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rffqrng/bitstream.hpp"
#include "rffqrng/error.hpp"
#include "rffqrng/event_source.hpp"
#include "rffqrng/rng.hpp"

namespace rffqrng {

/**
 * Analog view of the toggle flip-flop output as seen by the sampling D input.
 *
 * Transitions are linear ramps of length t_rise / t_fall. The D input reads
 * HIGH once the ramp passes the fraction eta of the swing, so a rising toggle
 * becomes visible eta * t_rise after the detection and a falling toggle
 * (1 - eta) * t_fall after it.
 */
struct AnalogTimingModel {
  double eta = 0.5;
  double t_rise = 0.0;   ///< seconds
  double t_fall = 0.0;   ///< seconds

  void validate() const {
    if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorCode::InvalidConfig, "eta must lie in [0, 1]");
    if (!(t_rise >= 0.0) || !(t_fall >= 0.0) || !std::isfinite(t_rise) || !std::isfinite(t_fall)) {
      throw Error(ErrorCode::InvalidConfig, "t_rise and t_fall must be finite and >= 0");
    }
  }

  [[nodiscard]] double rising_offset() const noexcept { return eta * t_rise; }
  [[nodiscard]] double falling_offset() const noexcept { return (1.0 - eta) * t_fall; }

  /// eta = 0.5 with t_rise = t_fall; the symmetric, bias-free case.
  static AnalogTimingModel ideal(double t_transition = 0.0) { return {0.5, t_transition, t_transition}; }
};

struct SamplerConfig {
  double f_bit = 20e6;              ///< Hz
  std::optional<double> phase;      ///< first clock edge, seconds; drawn from the seed when empty

  void validate() const {
    if (!(f_bit > 0.0) || !std::isfinite(f_bit)) throw Error(ErrorCode::InvalidConfig, "f_bit must be positive");
    if (phase && !(*phase >= 0.0)) throw Error(ErrorCode::InvalidConfig, "phase must be >= 0");
  }
};

struct Crossing {
  double time = 0.0;
  bool rising = false;

  bool operator==(const Crossing&) const = default;
};

/// Turns a detection sequence into D-input threshold crossings, checking order on the fly.
class CrossingTracker {
 public:
  CrossingTracker(const AnalogTimingModel& a, bool initial_state)
      : rise_(a.rising_offset()), fall_(a.falling_offset()), state_(initial_state) {}

  Crossing on_detection(double t) {
    state_ = !state_;
    const Crossing c{t + (state_ ? rise_ : fall_), state_};
    if (has_last_ && !(c.time > last_)) {
      throw Error(ErrorCode::NonMonotonicCrossings,
                  "detection at t=" + std::to_string(t) + " s crosses threshold before the previous transition");
    }
    last_ = c.time;
    has_last_ = true;
    return c;
  }

 private:
  double rise_;
  double fall_;
  bool state_;
  double last_ = 0.0;
  bool has_last_ = false;
};

inline std::vector<Crossing> threshold_crossings(const DetectionTimes& d, const AnalogTimingModel& a,
                                                 bool initial_state = false) {
  a.validate();
  CrossingTracker tracker(a, initial_state);
  std::vector<Crossing> out;
  out.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i > 0 && !(d.times[i] > d.times[i - 1])) {
      throw Error(ErrorCode::InvalidInput, "detection times must be strictly increasing");
    }
    out.push_back(tracker.on_detection(d.times[i]));
  }
  return out;
}

/**
 * Samples the D input at phase + k / f_bit for k = 0 .. n_bits-1. A crossing
 * exactly on an edge is not yet visible to that edge.
 */
inline BitStream sample_bits(std::span<const Crossing> crossings, const SamplerConfig& s, std::size_t n_bits,
                             bool initial_state = false) {
  s.validate();
  const double phase = s.phase.value_or(0.0);
  const double period = 1.0 / s.f_bit;
  for (std::size_t i = 1; i < crossings.size(); ++i) {
    if (!(crossings[i].time > crossings[i - 1].time)) {
      throw Error(ErrorCode::InvalidInput, "crossings must be strictly increasing");
    }
  }
  BitStreamWriter out(n_bits);
  bool state = initial_state;
  std::size_t next = 0;
  for (std::size_t k = 0; k < n_bits; ++k) {
    const double edge = phase + static_cast<double>(k) * period;
    while (next < crossings.size() && crossings[next].time < edge) {
      state = !state;
      ++next;
    }
    out.push(state);
  }
  return std::move(out).finish();
}

inline BitStream xor_streams(const BitStream& x, const BitStream& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "xor of " + std::to_string(x.size()) + " and " + std::to_string(y.size()) + " bits");
  }
  BitStream out(x);
  auto w = out.mutable_words();
  auto yw = y.words();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] ^= yw[i];
  return out;
}

/// One TRFF stage per detector; all stages share the analog model and the sampling clock.
struct QrngConfig {
  std::vector<DetectorConfig> stages;
  AnalogTimingModel analog;
  SamplerConfig sampler;
  std::size_t n_bits = 0;
  bool initial_state = false;

  [[nodiscard]] std::size_t n_stages() const noexcept { return stages.size(); }

  void validate() const {
    if (stages.empty()) throw Error(ErrorCode::InvalidConfig, "need at least one stage");
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    for (const auto& st : stages) {
      st.validate();
      if (!seen.emplace(st.seed, st.stream).second) {
        throw Error(ErrorCode::InvalidConfig, "stage seeds must be pairwise distinct");
      }
    }
    analog.validate();
    sampler.validate();
  }

  /// Identical detectors on substreams 0 .. n_stages-1 of one seed.
  static QrngConfig uniform(std::size_t n_stages, double f_det, double dead_time, std::uint64_t seed,
                            const AnalogTimingModel& analog, const SamplerConfig& sampler, std::size_t n_bits) {
    QrngConfig cfg;
    for (std::size_t i = 0; i < n_stages; ++i) cfg.stages.push_back({f_det, dead_time, seed, i});
    cfg.analog = analog;
    cfg.sampler = sampler;
    cfg.n_bits = n_bits;
    return cfg;
  }
};

/// Clock phase: the configured one, or uniform in [0, 1/f_bit) from the first stage's seed.
inline double resolve_phase(const QrngConfig& cfg) {
  if (cfg.sampler.phase) return *cfg.sampler.phase;
  constexpr std::uint64_t kPhaseSalt = 0x50484153455f5346ULL;
  Xoshiro256pp g(cfg.stages.front().seed ^ kPhaseSalt);
  return uniform_closed_open(g) / cfg.sampler.f_bit;
}

/// Streams detections straight into the sampler without materialising them.
inline BitStream simulate_stage(const DetectorConfig& det, const AnalogTimingModel& analog, double f_bit,
                                double phase, std::size_t n_bits, bool initial_state = false) {
  analog.validate();
  SamplerConfig{f_bit, phase}.validate();
  DetectionStream source(det);
  CrossingTracker tracker(analog, initial_state);
  BitStreamWriter out(n_bits);
  const double period = 1.0 / f_bit;
  bool state = initial_state;
  double next_crossing = tracker.on_detection(source.next()).time;
  for (std::size_t k = 0; k < n_bits; ++k) {
    const double edge = phase + static_cast<double>(k) * period;
    while (next_crossing < edge) {
      state = !state;
      next_crossing = tracker.on_detection(source.next()).time;
    }
    out.push(state);
  }
  return std::move(out).finish();
}

/// Raw per-stage outputs, before XOR combination. Stages run on up to `jobs` threads.
inline std::vector<BitStream> simulate_stage_streams(const QrngConfig& cfg, unsigned jobs = 1) {
  cfg.validate();
  const double phase = resolve_phase(cfg);
  auto run = [&](std::size_t i) {
    return simulate_stage(cfg.stages[i], cfg.analog, cfg.sampler.f_bit, phase, cfg.n_bits, cfg.initial_state);
  };
  std::vector<BitStream> out(cfg.n_stages());
  if (jobs <= 1 || cfg.n_stages() == 1) {
    for (std::size_t i = 0; i < cfg.n_stages(); ++i) out[i] = run(i);
    return out;
  }
  std::vector<std::future<BitStream>> pending;
  for (std::size_t i = 0; i < cfg.n_stages(); ++i) pending.push_back(std::async(std::launch::async, run, i));
  for (std::size_t i = 0; i < pending.size(); ++i) out[i] = pending[i].get();
  return out;
}

/// Full QRNG: stage outputs left-folded with XOR.
inline BitStream simulate_qrng(const QrngConfig& cfg, unsigned jobs = 1) {
  auto streams = simulate_stage_streams(cfg, jobs);
  BitStream acc = std::move(streams.front());
  for (std::size_t i = 1; i < streams.size(); ++i) acc = xor_streams(acc, streams[i]);
  return acc;
}

}  // namespace rffqrng

#endif  // RFFQRNG_RFF_CORE_HPP
