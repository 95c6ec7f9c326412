#ifndef RFFQRNG_RNG_HPP
#define RFFQRNG_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace rffqrng {

constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  auto z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/**
 * xoshiro256++ (Blackman & Vigna), 256-bit state, period 2^256 - 1.
 *
 * Substreams: the state seeded from `seed` is advanced by `index` calls of
 * jump(), each of which skips 2^128 outputs, so substreams never overlap for
 * any practical length. Satisfies UniformRandomBitGenerator.
 */
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  constexpr explicit Xoshiro256pp(std::uint64_t seed = 1) noexcept {
    auto x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  static constexpr Xoshiro256pp substream(std::uint64_t seed, std::uint64_t index) noexcept {
    Xoshiro256pp g(seed);
    for (std::uint64_t i = 0; i < index; ++i) g.jump();
    return g;
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    const auto result = rotl(s_[0] + s_[3], 23) + s_[0];
    const auto t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Equivalent to 2^128 calls of operator().
  constexpr void jump() noexcept {
    constexpr std::array<std::uint64_t, 4> kJump = {0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                                                    0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
    std::array<std::uint64_t, 4> acc{};
    for (auto word : kJump) {
      for (int b = 0; b < 64; ++b) {
        if (word & (std::uint64_t{1} << b)) {
          for (int i = 0; i < 4; ++i) acc[i] ^= s_[i];
        }
        (*this)();
      }
    }
    s_ = acc;
  }

  constexpr bool operator==(const Xoshiro256pp&) const = default;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

/// Uniform double on the open interval (0, 1): 53 random bits, offset by half an ulp.
template <class Gen>
inline double uniform_open(Gen& g) noexcept {
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform double on [0, 1).
template <class Gen>
inline double uniform_closed_open(Gen& g) noexcept {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Exponential variate with the given rate by inverse CDF.
template <class Gen>
inline double exponential(Gen& g, double rate) noexcept {
  return -std::log(uniform_open(g)) / rate;
}

}  // namespace rffqrng

#endif  // RFFQRNG_RNG_HPP
